#include "semfuse/logit_file.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace semfuse {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'L', 'G'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

}  // namespace

void write_logit_file(const std::string& path, const LogitDataset& ds) {
    if (ds.logits.size() != ds.labels.size())
        throw std::invalid_argument("write_logit_file: logits/labels size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_logit_file: cannot open " + path);

    out.write(kMagic, 4);
    write_raw<std::uint32_t>(out, kVersion);
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(ds.logits.size()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ds.num_classes));
    for (std::size_t i = 0; i < ds.logits.size(); ++i) {
        if (ds.logits[i].size() != static_cast<std::size_t>(ds.num_classes))
            throw std::invalid_argument("write_logit_file: inconsistent class count");
        for (double v : ds.logits[i]) write_raw<float>(out, static_cast<float>(v));
        write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ds.labels[i]));
    }
    if (!out) throw std::runtime_error("write_logit_file: write failed for " + path);
}

LogitDataset read_logit_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_logit_file: cannot open " + path);

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("read_logit_file: bad magic in " + path);
    auto version = read_raw<std::uint32_t>(in);
    if (version != kVersion)
        throw std::runtime_error("read_logit_file: unsupported version in " + path);
    auto n = read_raw<std::uint64_t>(in);
    auto c = read_raw<std::uint32_t>(in);
    if (c < 2) throw std::runtime_error("read_logit_file: class count < 2 in " + path);

    LogitDataset ds;
    ds.num_classes = static_cast<int>(c);
    ds.logits.reserve(n);
    ds.labels.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Logits l(c);
        for (std::uint32_t j = 0; j < c; ++j) l[j] = read_raw<float>(in);
        auto label = read_raw<std::uint32_t>(in);
        if (!in) throw std::runtime_error("read_logit_file: truncated file " + path);
        if (label >= c) throw std::runtime_error("read_logit_file: label out of range");
        ds.logits.push_back(std::move(l));
        ds.labels.push_back(static_cast<int>(label));
    }
    return ds;
}

}  // namespace semfuse
