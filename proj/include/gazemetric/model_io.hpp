#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "gazemetric/svm.hpp"

namespace gazemetric {

// Versioned flat model file. All integers and floats are little-endian;
// floats are IEEE-754 binary64. Layout (version 1):
//   magic "GZMSVM\0\0" | u32 version | u32 feature count | features (u32 len + bytes each)
//   standardizer mean[d] | standardizer inv_std[d]
//   u32 kernel | f64 gamma | f64 c | f64 tol | u64 seed
//   3 x pairwise model: u32 n_sv | f64 bias | coefficients[n_sv] | sv rows [n_sv x d]
//   u32 n_train | train rows [n_train x d] | train labels (u8 each)

namespace detail {

inline constexpr char kModelMagic[8] = {'G', 'Z', 'M', 'S', 'V', 'M', 0, 0};
inline constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!in) throw DataError("model file truncated");
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
    const auto len = read_le<std::uint32_t>(in);
    if (len > 1u << 20) throw DataError("model file: implausible string length");
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw DataError("model file truncated");
    return s;
}

}  // namespace detail

inline void save_model(const MulticlassModel& model, std::ostream& out) {
    using namespace detail;
    out.write(kModelMagic, sizeof(kModelMagic));
    write_le<std::uint32_t>(out, kModelVersion);

    const std::size_t d = model.schema.size();
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (const auto& name : model.schema) write_string(out, name);
    for (double v : model.standardizer.mean()) write_le<double>(out, v);
    for (double v : model.standardizer.inv_std()) write_le<double>(out, v);

    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.config.kernel));
    write_le<double>(out, model.config.gamma);
    write_le<double>(out, model.config.c);
    write_le<double>(out, model.config.tol);
    write_le<std::uint64_t>(out, model.config.seed);

    for (const auto& bin : model.pairwise) {
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(bin.support_vectors.size()));
        write_le<double>(out, bin.bias);
        for (double c : bin.coefficients) write_le<double>(out, c);
        for (const auto& sv : bin.support_vectors)
            for (double v : sv) write_le<double>(out, v);
    }

    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.train_rows.size()));
    for (const auto& row : model.train_rows)
        for (double v : row) write_le<double>(out, v);
    for (ExpertiseClass c : model.train_labels)
        write_le<std::uint8_t>(out, static_cast<std::uint8_t>(c));
}

inline MulticlassModel load_model(std::istream& in) {
    using namespace detail;
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
        throw DataError("not a gazemetric model file");
    const auto version = read_le<std::uint32_t>(in);
    if (version != kModelVersion)
        throw DataError("unsupported model version " + std::to_string(version));

    MulticlassModel model;
    const auto d = read_le<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < d; ++i) model.schema.push_back(read_string(in));
    std::vector<double> mean(d), inv_std(d);
    for (auto& v : mean) v = read_le<double>(in);
    for (auto& v : inv_std) v = read_le<double>(in);
    model.standardizer.set(std::move(mean), std::move(inv_std));

    model.config.kernel = static_cast<KernelId>(read_le<std::uint32_t>(in));
    model.config.gamma = read_le<double>(in);
    model.config.c = read_le<double>(in);
    model.config.tol = read_le<double>(in);
    model.config.seed = read_le<std::uint64_t>(in);

    for (auto& bin : model.pairwise) {
        const auto n_sv = read_le<std::uint32_t>(in);
        bin.kernel = model.config.kernel;
        bin.gamma = model.config.gamma;
        bin.c = model.config.c;
        bin.bias = read_le<double>(in);
        bin.coefficients.resize(n_sv);
        for (auto& c : bin.coefficients) c = read_le<double>(in);
        bin.support_vectors.assign(n_sv, std::vector<double>(d));
        for (auto& sv : bin.support_vectors)
            for (auto& v : sv) v = read_le<double>(in);
    }

    const auto n_train = read_le<std::uint32_t>(in);
    model.train_rows.assign(n_train, std::vector<double>(d));
    for (auto& row : model.train_rows)
        for (auto& v : row) v = read_le<double>(in);
    for (std::uint32_t i = 0; i < n_train; ++i)
        model.train_labels.push_back(static_cast<ExpertiseClass>(read_le<std::uint8_t>(in)));
    return model;
}

}  // namespace gazemetric
