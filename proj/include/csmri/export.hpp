#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "csmri/diagnostics.hpp"
#include "csmri/image.hpp"
#include "csmri/trace.hpp"
#include "csmri/wavelet.hpp"

namespace csmri::io {

namespace fs = std::filesystem;

inline constexpr const char* kTraceHeader = "run_id,iter,metric,subband,component,value";
inline constexpr const char* kQQHeader = "run_id,iter,subband,component,q_theory,q_emp";
inline constexpr const char* kTimingHeader = "run_id,iter,seconds,cumulative_seconds";

// Shortest round-trip decimal form; NaN -> "nan", infinities -> "inf"/"-inf".
std::string format_double(double v);

// Long-format rows: image NMSE, per-subband r NMSE, tau, tau-predicted NMSE,
// threshold, alpha and the alpha clamp flag. Wall time is kept out of this
// file so reruns are byte-identical.
void write_trace_rows(std::ostream& os, const std::string& run_id, const RunTrace& trace,
                      const SubbandLayout& layout);
void write_timing_rows(std::ostream& os, const std::string& run_id, const RunTrace& trace);
void write_qq_rows(std::ostream& os, const std::string& run_id, int iter,
                   const std::string& subband, const QQData& qq);

// Raw little-endian arrays with a JSON sidecar at `path` + ".json".
void write_complex_image(const fs::path& path, const ComplexImage& image, nlohmann::json meta = {});
void write_real_grid(const fs::path& path, std::size_t height, std::size_t width,
                     const std::vector<double>& values, nlohmann::json meta = {});
void write_mask(const fs::path& path, std::size_t height, std::size_t width,
                const std::vector<std::uint8_t>& values, nlohmann::json meta = {});
ComplexImage read_complex_image(const fs::path& path);

// Git blob object id (SHA-1 of "blob <len>\0" + content), lowercase hex.
std::string git_blob_hash(const std::string& content);
std::string git_blob_hash_file(const fs::path& path);

std::string read_text(const fs::path& path);

}  // namespace csmri::io
