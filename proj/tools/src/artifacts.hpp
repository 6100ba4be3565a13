#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ccpt::cli {

inline constexpr std::string_view kToolName = "ccpt";
std::string_view tool_version();

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a(std::string_view bytes);

/// 16 hex digits of the FNV-1a hash of the canonical (sorted, compact) JSON.
std::string config_hash(const nlohmann::json& canonical);

/// Scientific notation with 9 significant digits; "nan"/"inf"/"-inf" for non-finite values.
std::string format_number(double x);

/// Provenance shared by every artifact of one run.
struct RunStamp {
  std::string hash;
  std::uint64_t seed = 0;
  std::string config_json;  ///< compact canonical echo

  std::string header() const;
};

/// CSV writer with a two-line comment preamble (tool/hash/seed, config echo).
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const RunStamp& stamp,
            std::initializer_list<std::string_view> columns);

  class Row {
   public:
    explicit Row(CsvWriter& owner) : owner_(owner) {}
    Row& operator<<(double x);
    Row& operator<<(int x);
    Row& operator<<(std::size_t x);
    Row& operator<<(bool x);
    Row& operator<<(std::string_view text);
    ~Row();
    Row(const Row&) = delete;
    Row& operator=(const Row&) = delete;

   private:
    void sep();
    CsvWriter& owner_;
    std::string line_;
  };

  Row row() { return Row(*this); }
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

/// Writes a JSON document (pretty-printed, sorted keys, trailing newline).
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Artifact path: out_dir / "<stem>_<hash><suffix>".
std::filesystem::path artifact_path(const std::filesystem::path& out_dir, std::string_view stem,
                                    const RunStamp& stamp, std::string_view suffix);

}  // namespace ccpt::cli
