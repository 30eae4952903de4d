#include "simchan/serialize.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace simchan::io {

namespace {

constexpr char kDatasetMagic[] = "SIMCHAN-DS";
constexpr char kModelMagic[] = "SIMCHAN-MD";
constexpr std::size_t kMagicLen = 10;
constexpr std::uint8_t kFormatVersion = 1;

constexpr std::uint64_t kKindSimilarity = 0;
constexpr std::uint64_t kKindMlp = 1;
constexpr std::uint64_t kKindElm = 2;

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

class Reader {
  public:
    Reader(std::string data, std::string format) : data_(std::move(data)), format_(std::move(format)) {}

    void expect_magic(const char* magic) {
        if (data_.size() < kMagicLen + 1 || data_.compare(0, kMagicLen, magic, kMagicLen) != 0) {
            throw std::runtime_error("not a " + format_ + " file");
        }
        pos_ = kMagicLen;
        const auto version = static_cast<std::uint8_t>(data_[pos_++]);
        if (version != kFormatVersion) {
            throw std::runtime_error("unsupported " + format_ + " version " +
                                     std::to_string(version) + " (expected " +
                                     std::to_string(kFormatVersion) + ")");
        }
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        }
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    // After the header is parsed, the payload size is known exactly.
    void expect_total(std::uint64_t payload_doubles) {
        const std::uint64_t expected = pos_ + 8 * payload_doubles;
        if (data_.size() != expected) {
            throw std::runtime_error("truncated " + format_ + " file: expected " +
                                     std::to_string(expected) + " bytes, got " +
                                     std::to_string(data_.size()));
        }
    }

  private:
    void need(std::size_t bytes) {
        if (pos_ + bytes > data_.size()) {
            throw std::runtime_error("truncated " + format_ + " file: expected at least " +
                                     std::to_string(pos_ + bytes) + " bytes, got " +
                                     std::to_string(data_.size()));
        }
    }

    std::string data_;
    std::string format_;
    std::size_t pos_ = 0;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

void spill(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

void put_header(std::string& buf, const char* magic) {
    buf.append(magic, kMagicLen);
    buf.push_back(static_cast<char>(kFormatVersion));
}

void put_vec(std::string& buf, const num::RVec& v) {
    for (double x : v) put_f64(buf, x);
}

void read_vec(Reader& r, num::RVec& v, std::size_t n) {
    v.resize(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = r.f64();
}

std::uint64_t model_kind_of(Reader& r) { return r.u64(); }

net::SimilarityModel read_similarity(Reader& r) {
    net::SimilarityModel m;
    m.input_dim = r.u64();
    m.target_dim = r.u64();
    m.n_columns = r.u64();
    m.k = r.u64();
    m.from_dataset = r.u64() != 0;
    m.init_dataset_size = r.u64();
    const std::uint64_t plane = m.input_dim * m.n_columns;
    r.expect_total(2 * plane + m.target_dim * m.n_columns);
    read_vec(r, m.d_re, plane);
    read_vec(r, m.d_im, plane);
    read_vec(r, m.p, m.target_dim * m.n_columns);
    return m;
}

baselines::MlpModel read_mlp(Reader& r) {
    baselines::MlpModel m;
    m.input_dim = r.u64();
    const std::uint64_t h = r.u64();
    if (h != baselines::MlpModel::kHidden) {
        throw std::runtime_error("SIMCHAN-MD mlp: unexpected hidden width " + std::to_string(h));
    }
    r.expect_total(h * m.input_dim + h + h * h + h + 3 * h + 3);
    read_vec(r, m.w1, h * m.input_dim);
    read_vec(r, m.b1, h);
    read_vec(r, m.w2, h * h);
    read_vec(r, m.b2, h);
    read_vec(r, m.w3, 3 * h);
    read_vec(r, m.b3, 3);
    return m;
}

baselines::ElmModel read_elm(Reader& r) {
    baselines::ElmModel m;
    m.input_dim = r.u64();
    m.hidden = r.u64();
    r.expect_total(m.hidden * m.input_dim + m.hidden * 3);
    read_vec(r, m.w, m.hidden * m.input_dim);
    read_vec(r, m.beta, m.hidden * 3);
    return m;
}

const char* kind_name(std::uint64_t kind) {
    switch (kind) {
        case kKindSimilarity: return "similarity";
        case kKindMlp: return "mlp";
        case kKindElm: return "elm";
        default: return "unknown";
    }
}

Reader open_model(const std::string& path, std::uint64_t expected_kind, const char* op,
                  std::uint64_t* kind_out) {
    Reader r(slurp(path), "SIMCHAN-MD");
    r.expect_magic(kModelMagic);
    const std::uint64_t kind = model_kind_of(r);
    if (kind_out != nullptr) {
        *kind_out = kind;
        return r;
    }
    if (kind != expected_kind) {
        throw std::runtime_error(std::string(op) + ": file holds a " + kind_name(kind) +
                                 " model, not a " + kind_name(expected_kind) + " model");
    }
    return r;
}

}  // namespace

void save_dataset(const scene::LabeledDataset& ds, const std::string& path) {
    const std::uint64_t l = ds.size();
    num::check(l > 0, "save_dataset: empty dataset");
    const std::uint64_t n = ds.inputs.front().n_antennas;
    const std::uint64_t s = ds.inputs.front().n_subcarriers;
    const std::uint64_t t = ds.target_dim();
    for (const auto& ch : ds.inputs) {
        num::check(ch.n_antennas == n && ch.n_subcarriers == s && ch.values.size() == n * s,
                   "save_dataset: inconsistent input shapes");
    }
    for (const auto& tv : ds.targets) {
        num::check(tv.size() == t, "save_dataset: inconsistent target shapes");
    }

    std::string buf;
    buf.reserve(kMagicLen + 1 + 8 * (7 + ds.antenna_subset.size()) + 8 * l * (2 * n * s + t));
    put_header(buf, kDatasetMagic);
    put_u64(buf, l);
    put_u64(buf, n);
    put_u64(buf, s);
    put_u64(buf, t);
    put_u64(buf, static_cast<std::uint64_t>(ds.task));
    put_u64(buf, ds.n_train);
    put_u64(buf, ds.antenna_subset.size());
    for (std::size_t idx : ds.antenna_subset) put_u64(buf, idx);

    for (std::uint64_t i = 0; i < l; ++i) {
        for (const auto& v : ds.inputs[i].values) {
            put_f64(buf, v.real());
            put_f64(buf, v.imag());
        }
        put_vec(buf, ds.targets[i]);
    }
    spill(path, buf);
}

scene::LabeledDataset load_dataset(const std::string& path) {
    Reader r(slurp(path), "SIMCHAN-DS");
    r.expect_magic(kDatasetMagic);
    const std::uint64_t l = r.u64();
    const std::uint64_t n = r.u64();
    const std::uint64_t s = r.u64();
    const std::uint64_t t = r.u64();
    const std::uint64_t task_tag = r.u64();
    const std::uint64_t n_train = r.u64();
    const std::uint64_t subset_len = r.u64();
    if (task_tag > 1) {
        throw std::runtime_error("SIMCHAN-DS: unknown task tag " + std::to_string(task_tag));
    }
    if (n_train > l) {
        throw std::runtime_error("SIMCHAN-DS: train count exceeds dataset size");
    }

    scene::LabeledDataset ds;
    ds.task = static_cast<scene::Task>(task_tag);
    ds.n_train = n_train;
    ds.antenna_subset.resize(subset_len);
    for (std::uint64_t i = 0; i < subset_len; ++i) {
        ds.antenna_subset[i] = r.u64();
    }
    r.expect_total(l * (2 * n * s + t));

    ds.inputs.resize(l);
    ds.targets.resize(l);
    for (std::uint64_t i = 0; i < l; ++i) {
        auto& ch = ds.inputs[i];
        ch.n_antennas = n;
        ch.n_subcarriers = s;
        ch.values.resize(n * s);
        for (auto& v : ch.values) {
            const double re = r.f64();
            const double im = r.f64();
            v = num::cplx(re, im);
        }
        read_vec(r, ds.targets[i], t);
    }
    return ds;
}

void save_model(const net::SimilarityModel& m, const std::string& path) {
    std::string buf;
    put_header(buf, kModelMagic);
    put_u64(buf, kKindSimilarity);
    put_u64(buf, m.input_dim);
    put_u64(buf, m.target_dim);
    put_u64(buf, m.n_columns);
    put_u64(buf, m.k);
    put_u64(buf, m.from_dataset ? 1 : 0);
    put_u64(buf, m.init_dataset_size);
    put_vec(buf, m.d_re);
    put_vec(buf, m.d_im);
    put_vec(buf, m.p);
    spill(path, buf);
}

void save_model(const baselines::MlpModel& m, const std::string& path) {
    std::string buf;
    put_header(buf, kModelMagic);
    put_u64(buf, kKindMlp);
    put_u64(buf, m.input_dim);
    put_u64(buf, baselines::MlpModel::kHidden);
    put_vec(buf, m.w1);
    put_vec(buf, m.b1);
    put_vec(buf, m.w2);
    put_vec(buf, m.b2);
    put_vec(buf, m.w3);
    put_vec(buf, m.b3);
    spill(path, buf);
}

void save_model(const baselines::ElmModel& m, const std::string& path) {
    std::string buf;
    put_header(buf, kModelMagic);
    put_u64(buf, kKindElm);
    put_u64(buf, m.input_dim);
    put_u64(buf, m.hidden);
    put_vec(buf, m.w);
    put_vec(buf, m.beta);
    spill(path, buf);
}

AnyModel load_model(const std::string& path) {
    std::uint64_t kind = 0;
    Reader r = open_model(path, 0, "load_model", &kind);
    switch (kind) {
        case kKindSimilarity: return read_similarity(r);
        case kKindMlp: return read_mlp(r);
        case kKindElm: return read_elm(r);
        default:
            throw std::runtime_error("load_model: unknown model kind " + std::to_string(kind));
    }
}

net::SimilarityModel load_similarity_model(const std::string& path) {
    Reader r = open_model(path, kKindSimilarity, "load_similarity_model", nullptr);
    return read_similarity(r);
}

baselines::MlpModel load_mlp_model(const std::string& path) {
    Reader r = open_model(path, kKindMlp, "load_mlp_model", nullptr);
    return read_mlp(r);
}

baselines::ElmModel load_elm_model(const std::string& path) {
    Reader r = open_model(path, kKindElm, "load_elm_model", nullptr);
    return read_elm(r);
}

}  // namespace simchan::io
