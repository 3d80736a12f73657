#include "msglon/io.hpp"

#include "msglon/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace msglon {

using nlohmann::json;

json to_json(const MsgInstance& instance, const json& metadata)
{
    json components = json::array();
    for (const auto& g : instance.components())
        components.push_back({{"center", g.center}, {"weight", g.weight}, {"sigma", g.sigma}});
    return {
        {"format", "msglon-instance"},
        {"version", instance_format_version},
        {"d", instance.dim()},
        {"m", instance.size()},
        {"seed", instance.seed()},
        {"generator", instance.generator()},
        {"metadata", metadata},
        {"components", std::move(components)},
    };
}

namespace {

template <typename T>
T required(const json& doc, const char* key, const char* what)
{
    if (!doc.is_object() || !doc.contains(key))
        throw ValidationError(std::string(what) + ": missing field '" + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string(what) + ": bad field '" + key + "': " + e.what());
    }
}

} // namespace

MsgInstance instance_from_json(const json& doc)
{
    if (required<std::string>(doc, "format", "instance") != "msglon-instance")
        throw ValidationError("instance: unexpected format tag");
    if (required<int>(doc, "version", "instance") != instance_format_version)
        throw ValidationError("instance: unsupported version");
    const auto d = required<std::size_t>(doc, "d", "instance");
    const auto m = required<std::size_t>(doc, "m", "instance");
    const json& list = doc.contains("components") ? doc.at("components") : json();
    if (!list.is_array() || list.size() != m)
        throw ValidationError("instance: 'components' must be an array of m entries");
    std::vector<GaussianComponent> components;
    components.reserve(m);
    for (const auto& entry : list) {
        GaussianComponent g;
        g.center = required<std::vector<double>>(entry, "center", "component");
        g.weight = required<double>(entry, "weight", "component");
        g.sigma = required<double>(entry, "sigma", "component");
        if (g.center.size() != d)
            throw ValidationError("instance: center dimension does not match d");
        components.push_back(std::move(g));
    }
    const auto seed = doc.contains("seed") ? required<std::uint64_t>(doc, "seed", "instance") : 0;
    const auto generator = doc.contains("generator") ? required<std::string>(doc, "generator", "instance")
                                                     : std::string("manual");
    try {
        return MsgInstance(d, std::move(components), seed, generator);
    } catch (const StructuralError& e) {
        throw ValidationError(e.what());
    }
}

json to_json(const Lon& lon)
{
    json nodes = json::array();
    for (const auto& node : lon.nodes)
        nodes.push_back({{"id", node.component}, {"fitness", node.fitness}, {"position", node.position}});
    json edges = json::array();
    for (const auto& e : lon.edges)
        edges.push_back({{"source", lon.nodes[e.source].component},
                         {"target", lon.nodes[e.target].component},
                         {"weight", e.weight},
                         {"count", e.count}});
    return {
        {"format", "msglon-lon"},
        {"version", lon_format_version},
        {"variant", lon.variant},
        {"samples", lon.samples},
        {"radius", lon.radius},
        {"global_node", lon.nodes.empty() ? 0 : lon.nodes[lon.global_node].component},
        {"nodes", std::move(nodes)},
        {"edges", std::move(edges)},
    };
}

Lon lon_from_json(const json& doc)
{
    if (required<std::string>(doc, "format", "lon") != "msglon-lon")
        throw ValidationError("lon: unexpected format tag");
    Lon lon;
    lon.variant = required<std::string>(doc, "variant", "lon");
    lon.samples = required<std::size_t>(doc, "samples", "lon");
    lon.radius = required<double>(doc, "radius", "lon");
    const auto global = required<std::size_t>(doc, "global_node", "lon");
    std::map<std::size_t, std::size_t> position_of;
    for (const auto& entry : required<json>(doc, "nodes", "lon")) {
        LonNode node;
        node.component = required<std::size_t>(entry, "id", "lon node");
        node.fitness = required<double>(entry, "fitness", "lon node");
        node.position = required<std::vector<double>>(entry, "position", "lon node");
        if (!position_of.emplace(node.component, lon.nodes.size()).second)
            throw ValidationError("lon: duplicate node id");
        lon.nodes.push_back(std::move(node));
    }
    auto lookup = [&](std::size_t id) {
        auto it = position_of.find(id);
        if (it == position_of.end())
            throw ValidationError("lon: edge endpoint " + std::to_string(id) + " is not a node");
        return it->second;
    };
    lon.global_node = lookup(global);
    for (const auto& entry : required<json>(doc, "edges", "lon")) {
        LonEdge e;
        e.source = lookup(required<std::size_t>(entry, "source", "lon edge"));
        e.target = lookup(required<std::size_t>(entry, "target", "lon edge"));
        e.weight = required<double>(entry, "weight", "lon edge");
        e.count = entry.contains("count") ? required<std::size_t>(entry, "count", "lon edge") : 0;
        if (e.source == e.target)
            throw ValidationError("lon: self edge");
        lon.edges.push_back(e);
    }
    return lon;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json read_json(const std::filesystem::path& path)
{
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": invalid JSON: " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& doc)
{
    write_file_atomic(path, doc.dump(2) + "\n");
}

MsgInstance load_instance(const std::filesystem::path& path)
{
    return instance_from_json(read_json(path));
}

void save_instance(const std::filesystem::path& path, const MsgInstance& instance, const json& metadata)
{
    write_json(path, to_json(instance, metadata));
}

std::string format_double(double value)
{
    if (std::isnan(value))
        return "";
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::size_t CsvTable::column(const std::string& name) const
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name)
            return i;
    }
    throw ValidationError("csv: missing column '" + name + "'");
}

std::string to_csv(const CsvTable& table)
{
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i != 0)
                out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(table.header);
    for (const auto& row : table.rows)
        line(row);
    return out;
}

CsvTable parse_csv(const std::string& text)
{
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != table.header.size())
                throw ValidationError("csv: row has " + std::to_string(cells.size()) + " cells, header has "
                                      + std::to_string(table.header.size()));
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path)
{
    return parse_csv(read_file(path));
}

} // namespace msglon
