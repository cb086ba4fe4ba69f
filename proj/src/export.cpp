#include "csmri/export.hpp"

#include <openssl/evp.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace csmri::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary export assumes little endian");

void write_sidecar(const fs::path& path, nlohmann::json meta) {
    std::ofstream os(path.string() + ".json");
    if (!os) throw std::runtime_error("io: cannot write " + path.string() + ".json");
    os << meta.dump(2) << '\n';
}

template <class T>
void write_raw(const fs::path& path, const T* data, std::size_t count) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("io: cannot write " + path.string());
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
}

void row(std::ostream& os, const std::string& run_id, int iter, const char* metric,
         const std::string& subband, double value) {
    os << run_id << ',' << iter << ',' << metric << ',' << subband << ",none,"
       << format_double(value) << '\n';
}

void subband_rows(std::ostream& os, const std::string& run_id, int iter, const char* metric,
                  const SubbandLayout& layout, const SubbandVector& values) {
    for (std::size_t j = 0; j < values.size() && j < layout.count(); ++j) {
        row(os, run_id, iter, metric, layout[j].label(), values[j]);
    }
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_trace_rows(std::ostream& os, const std::string& run_id, const RunTrace& trace,
                      const SubbandLayout& layout) {
    for (const IterationRecord& rec : trace.records) {
        row(os, run_id, rec.iter, "nmse_db", "all", rec.nmse_db);
        subband_rows(os, run_id, rec.iter, "subband_nmse_db", layout, rec.subband_nmse_db);
        subband_rows(os, run_id, rec.iter, "tau", layout, rec.tau);
        subband_rows(os, run_id, rec.iter, "tau_nmse_db", layout, rec.tau_nmse_db);
        subband_rows(os, run_id, rec.iter, "threshold", layout, rec.threshold);
        subband_rows(os, run_id, rec.iter, "alpha", layout, rec.alpha);
        row(os, run_id, rec.iter, "alpha_clamped", "all", rec.alpha_clamped ? 1.0 : 0.0);
    }
}

void write_timing_rows(std::ostream& os, const std::string& run_id, const RunTrace& trace) {
    double cumulative = trace.precompute_seconds;
    os << run_id << ",-1," << format_double(trace.precompute_seconds) << ','
       << format_double(cumulative) << '\n';
    for (const IterationRecord& rec : trace.records) {
        cumulative += rec.seconds;
        os << run_id << ',' << rec.iter << ',' << format_double(rec.seconds) << ','
           << format_double(cumulative) << '\n';
    }
}

void write_qq_rows(std::ostream& os, const std::string& run_id, int iter,
                   const std::string& subband, const QQData& qq) {
    for (const auto& [theory, empirical] : qq.points) {
        os << run_id << ',' << iter << ',' << subband << ',' << to_string(qq.component) << ','
           << format_double(theory) << ',' << format_double(empirical) << '\n';
    }
}

void write_complex_image(const fs::path& path, const ComplexImage& image, nlohmann::json meta) {
    write_raw(path, image.data.data(), image.size());
    meta["height"] = image.height;
    meta["width"] = image.width;
    meta["dtype"] = "complex128";
    meta["order"] = "row-major, interleaved real/imag float64 little-endian";
    write_sidecar(path, std::move(meta));
}

void write_real_grid(const fs::path& path, std::size_t height, std::size_t width,
                     const std::vector<double>& values, nlohmann::json meta) {
    if (values.size() != height * width) throw std::invalid_argument("io: grid size mismatch");
    write_raw(path, values.data(), values.size());
    meta["height"] = height;
    meta["width"] = width;
    meta["dtype"] = "float64";
    meta["order"] = "row-major little-endian";
    write_sidecar(path, std::move(meta));
}

void write_mask(const fs::path& path, std::size_t height, std::size_t width,
                const std::vector<std::uint8_t>& values, nlohmann::json meta) {
    if (values.size() != height * width) throw std::invalid_argument("io: grid size mismatch");
    write_raw(path, values.data(), values.size());
    meta["height"] = height;
    meta["width"] = width;
    meta["dtype"] = "uint8";
    meta["order"] = "row-major, centered k-space grid";
    write_sidecar(path, std::move(meta));
}

ComplexImage read_complex_image(const fs::path& path) {
    std::ifstream meta_in(path.string() + ".json");
    if (!meta_in) throw std::runtime_error("io: missing sidecar for " + path.string());
    const nlohmann::json meta = nlohmann::json::parse(meta_in);
    if (meta.at("dtype") != "complex128") throw std::runtime_error("io: not a complex128 image");
    ComplexImage img(meta.at("height").get<std::size_t>(), meta.at("width").get<std::size_t>());
    std::ifstream is(path, std::ios::binary);
    is.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.size() * sizeof(cplx)));
    if (!is) throw std::runtime_error("io: truncated image file " + path.string());
    return img;
}

std::string git_blob_hash(const std::string& content) {
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw std::runtime_error("io: EVP context allocation failed");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                    EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("io: SHA-1 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("io: cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string git_blob_hash_file(const fs::path& path) { return git_blob_hash(read_text(path)); }

}  // namespace csmri::io
