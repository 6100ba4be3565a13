#include "artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ccpt::cli {

std::string_view tool_version() { return CCPT_VERSION; }

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const nlohmann::json& canonical) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical.dump())));
  return buf;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", x == 0.0 ? 0.0 : x);
  return buf;
}

std::string RunStamp::header() const {
  return "# " + std::string(kToolName) + " " + std::string(tool_version()) + " config_hash=" + hash +
         " seed=" + std::to_string(seed);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const RunStamp& stamp,
                     std::initializer_list<std::string_view> columns)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << stamp.header() << '\n' << "# config " << stamp.config_json << '\n';
  bool first = true;
  for (const auto c : columns) {
    if (!first) out_ << ',';
    out_ << c;
    first = false;
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw std::runtime_error("failed writing " + path_.string());
}

void CsvWriter::Row::sep() {
  if (!line_.empty()) line_ += ',';
}

CsvWriter::Row& CsvWriter::Row::operator<<(double x) {
  sep();
  line_ += format_number(x);
  return *this;
}

CsvWriter::Row& CsvWriter::Row::operator<<(int x) {
  sep();
  line_ += std::to_string(x);
  return *this;
}

CsvWriter::Row& CsvWriter::Row::operator<<(std::size_t x) {
  sep();
  line_ += std::to_string(x);
  return *this;
}

CsvWriter::Row& CsvWriter::Row::operator<<(bool x) {
  sep();
  line_ += x ? "1" : "0";
  return *this;
}

CsvWriter::Row& CsvWriter::Row::operator<<(std::string_view text) {
  sep();
  line_ += text;
  return *this;
}

CsvWriter::Row::~Row() { owner_.out_ << line_ << '\n'; }

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  out.close();
  if (out.fail()) throw std::runtime_error("failed writing " + path.string());
}

std::filesystem::path artifact_path(const std::filesystem::path& out_dir, std::string_view stem,
                                    const RunStamp& stamp, std::string_view suffix) {
  return out_dir / (std::string(stem) + "_" + stamp.hash + std::string(suffix));
}

}  // namespace ccpt::cli
