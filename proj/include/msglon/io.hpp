#ifndef MSGLON_IO_HPP
#define MSGLON_IO_HPP

// JSON and CSV formats shared by the library and the CLI.
//
// Instance file (format "msglon-instance", version 1):
//   { "format", "version", "d", "m", "seed", "generator", "metadata": {...},
//     "components": [ { "center": [..d..], "weight": w, "sigma": s }, ... ] }
//
// LON file (format "msglon-lon", version 1):
//   { "format", "version", "variant", "samples", "radius", "global_node",
//     "nodes": [ { "id", "fitness", "position" } ], "edges": [ { "source", "target", "weight", "count" } ] }
// Node and edge endpoints use component indices.

#include "msglon/lon.hpp"
#include "msglon/msg.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace msglon {

inline constexpr int instance_format_version = 1;
inline constexpr int lon_format_version = 1;

nlohmann::json to_json(const MsgInstance& instance, const nlohmann::json& metadata = nlohmann::json::object());
/// Throws ValidationError on schema violations.
MsgInstance instance_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const Lon& lon);
Lon lon_from_json(const nlohmann::json& doc);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Reads and parses; IoError if unreadable, ValidationError if not JSON.
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

MsgInstance load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const MsgInstance& instance,
                   const nlohmann::json& metadata = nlohmann::json::object());

/// Round-trip formatting for doubles ("%.17g"); NaN is written as an empty cell.
std::string format_double(double value);

/// Minimal CSV (no quoting; cells must not contain commas or newlines).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const; ///< throws ValidationError when missing
};
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

} // namespace msglon

#endif
