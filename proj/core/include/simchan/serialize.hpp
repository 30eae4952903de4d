#pragma once

#include <string>
#include <variant>

#include "simchan/baselines.hpp"
#include "simchan/chanscene.hpp"
#include "simchan/simnet.hpp"

namespace simchan::io {

// Binary dataset envelope: magic "SIMCHAN-DS", version byte, little-endian
// 64-bit dims (L, N, S, T, task tag, train count, subset length, subset
// indices), then raw little-endian doubles: per sample the N*S complex
// input values interleaved (re, im) followed by the T target values.
void save_dataset(const scene::LabeledDataset& ds, const std::string& path);
scene::LabeledDataset load_dataset(const std::string& path);

// Model envelope: magic "SIMCHAN-MD", version byte, 64-bit model-kind tag
// (0 similarity, 1 mlp, 2 elm), dims, then raw little-endian doubles.
void save_model(const net::SimilarityModel& m, const std::string& path);
void save_model(const baselines::MlpModel& m, const std::string& path);
void save_model(const baselines::ElmModel& m, const std::string& path);

using AnyModel = std::variant<net::SimilarityModel, baselines::MlpModel, baselines::ElmModel>;
AnyModel load_model(const std::string& path);

// Kind-checked loads; loading a file that holds a different kind fails.
net::SimilarityModel load_similarity_model(const std::string& path);
baselines::MlpModel load_mlp_model(const std::string& path);
baselines::ElmModel load_elm_model(const std::string& path);

}  // namespace simchan::io
