#pragma once

#include <string>
#include <vector>

#include "fklab/verify.hpp"

namespace fklab {

// Pretty-printed JSON with a fixed key order, ending in a newline.  The same
// certificate always serializes to the same bytes.
std::string certificate_to_json(const Certificate& cert);

void write_certificate(const Certificate& cert, const std::string& path);

// Parse one certificate file down to a summary row; `malformed` is set (and
// the rest left blank) when the file is not a readable certificate.
CertSummary summarize_certificate_file(const std::string& path);

// Summaries for every *.json under dir, sorted by file name.
std::vector<CertSummary> report_directory(const std::string& dir);

// Fixed-width text table of summary rows.
std::string render_summary_table(const std::vector<CertSummary>& rows);

// CSV with %.17g cells.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Write base_path.json ({n, dims, h, origin, cells}) and base_path.bin (flat
// row-major, x-fastest, one 0/1 byte per grid cell).
void export_mask(const DomainMask& mask, const std::string& base_path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace fklab
