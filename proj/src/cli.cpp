#include "msglon/cli.hpp"

#include "msglon/analysis.hpp"
#include "msglon/bench.hpp"
#include "msglon/error.hpp"
#include "msglon/gd_oracle.hpp"
#include "msglon/io.hpp"
#include "msglon/lon.hpp"
#include "msglon/msg.hpp"
#include "msglon/novelty.hpp"
#include "msglon/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace msglon::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* tool_name = "msglon";

struct Global {
    std::size_t threads = 0;
    bool log_json = false;
};

class Log {
public:
    Log(std::ostream& err, bool as_json) : err_(err), json_(as_json) {}

    void info(const std::string& event, const json& fields = json::object()) const
    {
        if (json_) {
            json line = fields;
            line["level"] = "info";
            line["event"] = event;
            err_ << line.dump() << '\n';
            return;
        }
        err_ << tool_name << ": " << event;
        for (const auto& [key, value] : fields.items())
            err_ << ' ' << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump());
        err_ << '\n';
    }

private:
    std::ostream& err_;
    bool json_;
};

fs::path output_root()
{
    if (const char* root = std::getenv("MSGLON_OUTPUT_ROOT"); root != nullptr && *root != '\0')
        return root;
    return ".";
}

fs::path or_default(const std::string& given, const fs::path& fallback)
{
    return given.empty() ? output_root() / fallback : fs::path(given);
}

void ensure_directory(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        ensure_directory(path.parent_path());
    write_file_atomic(path, text);
}

// Manifests carry no timestamps so that reruns are byte-identical.
void write_manifest(const fs::path& path, const std::string& command, const std::vector<std::string>& args,
                    const std::string& config, const json& summary)
{
    json doc = {{"tool", tool_name},
                {"command", command},
                {"argv", args},
                {"config", config},
                {"summary", summary}};
    write_text(path, doc.dump(2) + "\n");
}

struct Source {
    std::string id;
    fs::path path;
};

/// Instances named on the command line, then the sorted contents of <corpus>/instances.
std::vector<Source> collect_sources(const std::vector<std::string>& files, const std::string& corpus)
{
    std::vector<Source> sources;
    for (const auto& f : files)
        sources.push_back({fs::path(f).stem().string(), f});
    if (!corpus.empty()) {
        const fs::path dir = fs::path(corpus) / "instances";
        std::error_code ec;
        if (!fs::is_directory(dir, ec))
            throw IoError("corpus has no instances directory: " + dir.string());
        std::vector<fs::path> found;
        for (const auto& entry : fs::directory_iterator(dir, ec)) {
            if (entry.path().extension() == ".json")
                found.push_back(entry.path());
        }
        if (ec)
            throw IoError("cannot list " + dir.string() + ": " + ec.message());
        std::sort(found.begin(), found.end());
        for (const auto& p : found)
            sources.push_back({p.stem().string(), p});
    }
    if (sources.empty())
        throw ValidationError("no instances given (use --instance or --corpus)");
    return sources;
}

struct LoadedInstance {
    MsgInstance instance;
    json metadata;
};

LoadedInstance load(const Source& source)
{
    const json doc = read_json(source.path);
    MsgInstance instance = instance_from_json(doc);
    json metadata = doc.contains("metadata") && doc["metadata"].is_object() ? doc["metadata"] : json::object();
    return {std::move(instance), std::move(metadata)};
}

// features.csv: the corpus table shared by `lon`, `ns` and `analyze`.
const std::vector<std::string>& feature_table_columns()
{
    static const std::vector<std::string> columns = [] {
        std::vector<std::string> c = {"instance_id", "d",          "m",
                                      "mode",        "seed",       "generation",
                                      "phenotype_nodes", "phenotype_funnel"};
        for (const char* name : LonFeatures::names)
            c.emplace_back(name);
        return c;
    }();
    return columns;
}

std::vector<std::string> feature_row(const CorpusEntry& e)
{
    std::vector<std::string> row = {e.instance_id,
                                    std::to_string(e.dim),
                                    std::to_string(e.components),
                                    e.mode,
                                    std::to_string(e.seed),
                                    std::to_string(e.generation)};
    const Phenotype p = phenotype_of(e.features, e.components);
    row.push_back(format_double(p[0]));
    row.push_back(format_double(p[1]));
    for (double v : e.features.values())
        row.push_back(format_double(v));
    return row;
}

std::string feature_table(const std::vector<CorpusEntry>& entries)
{
    CsvTable table;
    table.header = feature_table_columns();
    for (const auto& e : entries)
        table.rows.push_back(feature_row(e));
    return to_csv(table);
}

double to_double(const std::string& cell, const std::string& column)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used == cell.size())
            return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("bad number in column " + column + ": '" + cell + "'");
}

std::uint64_t to_unsigned(const std::string& cell, const std::string& column)
{
    try {
        std::size_t used = 0;
        const auto v = std::stoull(cell, &used);
        if (used == cell.size() && !cell.empty() && cell[0] != '-')
            return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("bad integer in column " + column + ": '" + cell + "'");
}

std::vector<CorpusEntry> read_feature_table(const fs::path& path)
{
    const CsvTable table = read_csv(path);
    std::vector<CorpusEntry> entries;
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw ValidationError(path.string() + ": ragged row");
        auto cell = [&](const std::string& name) -> const std::string& { return row[table.column(name)]; };
        CorpusEntry e;
        e.instance_id = cell("instance_id");
        e.dim = to_unsigned(cell("d"), "d");
        e.components = to_unsigned(cell("m"), "m");
        e.mode = cell("mode");
        e.seed = to_unsigned(cell("seed"), "seed");
        e.generation = to_unsigned(cell("generation"), "generation");
        std::array<double, LonFeatures::count> values{};
        for (std::size_t i = 0; i < LonFeatures::count; ++i)
            values[i] = to_double(cell(LonFeatures::names[i]), LonFeatures::names[i]);
        e.features = LonFeatures::from_values(values);
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<PerformanceRow> read_performance(const fs::path& path)
{
    const CsvTable table = read_csv(path);
    std::vector<PerformanceRow> rows;
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw ValidationError(path.string() + ": ragged row");
        rows.push_back({row[table.column("instance_id")], row[table.column("algorithm")],
                        to_double(row[table.column("success_rate")], "success_rate"),
                        to_double(row[table.column("conv_time")], "conv_time")});
    }
    return rows;
}

std::string pgm(std::size_t width, std::size_t height, const std::vector<unsigned char>& pixels)
{
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    return out;
}

// ---------------------------------------------------------------------------------------------

struct GenerateOptions {
    std::size_t d = 2;
    std::size_t m = 0;
    std::uint64_t seed = 0;
    std::string kind = "random";
    std::size_t count = 1;
    std::string out;
    std::string out_dir;
};

MsgInstance generate_one(const GenerateOptions& o, std::uint64_t seed)
{
    const std::size_t m = o.m != 0 ? o.m : default_component_count(o.d);
    if (o.kind == "random")
        return make_random_instance(o.d, m, seed);
    return make_archetype(archetype_from_string(o.kind), o.d, m, seed);
}

void run_generate(const GenerateOptions& o, const Log& log, const std::vector<std::string>& args,
                  const std::string& config)
{
    if (o.d == 0)
        throw ValidationError("generate: --d must be positive");
    if (o.kind != "random")
        (void)archetype_from_string(o.kind);
    if (o.out_dir.empty() && o.count == 1) {
        const fs::path path = or_default(o.out, "instance.json");
        const MsgInstance inst = generate_one(o, o.seed);
        save_instance(path, inst, {{"mode", "generate"}, {"kind", o.kind}, {"generation", 0}});
        log.info("generate", {{"path", path.string()}, {"d", inst.dim()}, {"m", inst.size()}});
        return;
    }
    if (!o.out.empty())
        throw ValidationError("generate: --out writes one instance; use --out-dir with --count");
    const fs::path dir = or_default(o.out_dir, "corpus");
    json ids = json::array();
    for (std::size_t i = 0; i < o.count; ++i) {
        char id[96];
        std::snprintf(id, sizeof id, "%s-d%zu-s%llu-%04zu", o.kind.c_str(), o.d,
                      static_cast<unsigned long long>(o.seed), i);
        const MsgInstance inst = generate_one(o, stream_key(o.seed, "generate", i));
        save_instance(dir / "instances" / (std::string(id) + ".json"), inst,
                      {{"mode", "generate"}, {"kind", o.kind}, {"generation", 0}, {"id", id}});
        ids.push_back(id);
    }
    write_manifest(dir / "manifest.json", "generate", args, config, {{"instances", ids}});
    log.info("generate", {{"dir", dir.string()}, {"instances", o.count}});
}

// ---------------------------------------------------------------------------------------------

struct LonOptions {
    std::vector<std::string> instances;
    std::string corpus;
    std::size_t samples = 0;
    double radius = 0.0;
    std::optional<std::uint64_t> seed;
    std::string variant = "full";
    std::string out_dir;
};

void run_lon(const LonOptions& o, const Global& g, const Log& log, const std::vector<std::string>& args,
             const std::string& config)
{
    if (o.variant != "full" && o.variant != "monotonic" && o.variant != "funnel")
        throw ValidationError("lon: --variant must be full, monotonic or funnel");
    const auto sources = collect_sources(o.instances, o.corpus);
    const fs::path dir = or_default(o.out_dir, "lon");
    std::vector<CorpusEntry> entries(sources.size());
    std::vector<std::string> documents(sources.size());
    // Load serially so a bad file fails before any work starts.
    std::vector<LoadedInstance> loaded;
    for (const auto& s : sources)
        loaded.push_back(load(s));
    parallel_for(sources.size(), g.threads, [&](std::size_t i) {
        const MsgInstance& inst = loaded[i].instance;
        LonSettings settings;
        settings.samples = o.samples;
        settings.radius = o.radius;
        settings.seed = o.seed.value_or(inst.seed());
        const LonAnalysis a = analyze_instance(inst, settings);
        Lon lon = a.lon;
        if (o.variant == "monotonic")
            lon = monotonic_lon(lon);
        else if (o.variant == "funnel")
            lon = funnel_lon(monotonic_lon(lon));
        documents[i] = to_json(lon).dump() + "\n";
        const json& meta = loaded[i].metadata;
        entries[i] = {sources[i].id,
                      inst.dim(),
                      inst.size(),
                      meta.value("mode", std::string("manual")),
                      settings.seed,
                      meta.value("generation", std::size_t{0}),
                      a.features};
    });
    for (std::size_t i = 0; i < sources.size(); ++i)
        write_text(dir / "lons" / (sources[i].id + ".json"), documents[i]);
    write_text(dir / "features.csv", feature_table(entries));
    write_manifest(dir / "manifest.json", "lon", args, config, {{"instances", sources.size()}});
    log.info("lon", {{"dir", dir.string()}, {"instances", sources.size()}, {"variant", o.variant}});
}

// ---------------------------------------------------------------------------------------------

struct BoaOptions {
    std::vector<std::string> instances;
    std::string corpus;
    std::size_t d = 2;
    std::size_t m = 0;
    std::size_t count = 10;
    std::uint64_t seed = 0;
    double eta = 0.01;
    std::size_t steps = 2000;
    std::size_t starts_per_dim = 5000;
    std::string out;
    std::string raster;
    std::size_t raster_size = 256;
};

void run_validate_boa(const BoaOptions& o, const Global& g, const Log& log, const std::vector<std::string>& args,
                      const std::string& config)
{
    GdConfig gd;
    gd.eta = o.eta;
    gd.max_steps = o.steps;
    gd.starts_per_dim = o.starts_per_dim;
    gd.threads = g.threads;
    validate(gd);

    std::vector<std::pair<std::string, MsgInstance>> work;
    if (!o.instances.empty() || !o.corpus.empty()) {
        for (const auto& s : collect_sources(o.instances, o.corpus))
            work.emplace_back(s.id, load(s).instance);
    } else {
        if (o.d == 0 || o.count == 0)
            throw ValidationError("validate-boa: --d and --instances must be positive");
        const std::size_t m = o.m != 0 ? o.m : default_component_count(o.d);
        for (std::size_t i = 0; i < o.count; ++i) {
            char id[64];
            std::snprintf(id, sizeof id, "random-d%zu-s%llu-%04zu", o.d, static_cast<unsigned long long>(o.seed), i);
            work.emplace_back(id, make_random_instance(o.d, m, stream_key(o.seed, "validate-boa", i)));
        }
    }

    CsvTable table;
    table.header = {"instance_id", "d", "m", "local_optima", "starts", "disagreements", "difference_rate",
                    "fallbacks", "unconverged", "f_decreases"};
    std::vector<double> rates;
    for (const auto& [id, inst] : work) {
        const BasinAssignment basins = build_basins(inst);
        const DifferenceReport r = difference_rate(inst, basins, gd);
        rates.push_back(r.rate);
        table.rows.push_back({id, std::to_string(inst.dim()), std::to_string(inst.size()),
                              std::to_string(basins.optima.indices.size()), std::to_string(r.starts),
                              std::to_string(r.disagreements), format_double(r.rate), std::to_string(r.fallbacks),
                              std::to_string(r.unconverged), std::to_string(r.f_decreases)});
        log.info("validate-boa.instance", {{"id", id}, {"rate", r.rate}});
    }
    const fs::path out = or_default(o.out, "validate-boa.csv");
    write_text(out, to_csv(table));

    json summary = {{"instances", work.size()}, {"median_rate", median(rates)}};
    if (!o.raster.empty()) {
        const auto& inst = work.front().second;
        if (inst.dim() != 2)
            throw ValidationError("validate-boa: --raster needs d = 2");
        if (o.raster_size == 0)
            throw ValidationError("validate-boa: --raster-size must be positive");
        const BasinAssignment basins = build_basins(inst);
        const std::size_t n = o.raster_size;
        std::vector<unsigned char> pixels(n * n);
        std::vector<std::size_t> rank(inst.size(), 0);
        for (std::size_t i = 0; i < basins.optima.indices.size(); ++i)
            rank[basins.optima.indices[i]] = i;
        GdConfig single = gd;
        single.threads = 1;
        std::size_t disagreements = 0;
        std::vector<unsigned char> mismatch(n * n, 0);
        // Row 0 is the top of the image (x2 = 1).
        parallel_for(n, g.threads, [&](std::size_t row) {
            for (std::size_t col = 0; col < n; ++col) {
                const std::vector<double> x = {(static_cast<double>(col) + 0.5) / static_cast<double>(n),
                                               1.0 - (static_cast<double>(row) + 0.5) / static_cast<double>(n)};
                const std::size_t region = assign_point(inst, basins, x);
                const std::size_t gd_owner = gd_converge(inst, basins, x, single).optimum;
                const std::size_t p = row * n + col;
                if (region != gd_owner) {
                    mismatch[p] = 1;
                    pixels[p] = 255;
                } else {
                    pixels[p] = static_cast<unsigned char>(30 + (rank[region] * 67) % 180);
                }
            }
        });
        for (unsigned char v : mismatch)
            disagreements += v;
        write_text(o.raster, pgm(n, n, pixels));
        summary["raster"] = {{"path", o.raster}, {"size", n}, {"disagreements", disagreements}};
    }
    write_manifest(fs::path(out).replace_extension(".manifest.json"), "validate-boa", args, config, summary);
    log.info("validate-boa", summary);
}

// ---------------------------------------------------------------------------------------------

struct NsOptions {
    std::string mode = "ns-plus";
    NsConfig config;
    std::string out_dir;
};

void run_ns(NsOptions o, const Global& g, const Log& log, const std::vector<std::string>& args,
            const std::string& config_text)
{
    const NsMode mode = ns_mode_from_string(o.mode);
    o.config.threads = g.threads;
    o.config.seeded_archetypes = mode == NsMode::NoveltyPlus;
    validate(o.config);
    const NsConfig& c = o.config;
    const fs::path dir = or_default(o.out_dir, "ns-" + o.mode + "-s" + std::to_string(c.seed));

    std::vector<Solution> solutions;
    json trace = json::array();
    std::size_t archive_size = 0;
    std::vector<double> centers;
    if (mode == NsMode::Random) {
        solutions = random_baseline(c);
        centers = sample_centers(c.dim, c.m(), c.seed);
    } else {
        NoveltySearch search(c);
        while (search.generation() < c.t_max) {
            search.step();
            trace.push_back({{"generation", search.generation()},
                             {"threshold", search.threshold()},
                             {"archive", search.archive().size()}});
            log.info("ns.generation", {{"generation", search.generation()}, {"archive", search.archive().size()}});
        }
        solutions = search.all_solutions();
        archive_size = search.archive().size();
        centers = search.centers();
    }

    std::vector<CorpusEntry> entries;
    std::vector<FeaturePoint> points;
    for (const auto& s : solutions) {
        char id[96];
        std::snprintf(id, sizeof id, "%s-s%llu-%05zu", o.mode.c_str(), static_cast<unsigned long long>(c.seed), s.id);
        json meta = {{"mode", o.mode}, {"generation", s.generation}, {"id", id},
                     {"origin", s.origin}, {"ns_seed", c.seed}};
        if (s.parent)
            meta["parent"] = *s.parent;
        save_instance(dir / "instances" / (std::string(id) + ".json"), instance_of(c, centers, s), meta);
        entries.push_back({id, c.dim, c.m(), o.mode, s.lon_seed, s.generation, s.features});
        points.push_back({s.features.num_nodes, s.features.global_funnel_size});
    }
    write_text(dir / "features.csv", feature_table(entries));
    const CoverageGrid grid = coverage(points, c.m());
    json summary = {{"mode", o.mode},    {"solutions", solutions.size()}, {"archive", archive_size},
                    {"coverage", grid.coverage}, {"thresholds", trace}};
    write_manifest(dir / "manifest.json", "ns", args, config_text, summary);
    log.info("ns", {{"dir", dir.string()}, {"solutions", solutions.size()}, {"coverage", grid.coverage}});
}

// ---------------------------------------------------------------------------------------------

struct BenchOptions {
    std::vector<std::string> instances;
    std::string corpus;
    std::string algorithm = "both";
    BenchProtocol protocol;
    std::string metric = "euclidean";
    std::string out;
    std::string trials_out;
};

void run_bench(BenchOptions o, const Global& g, const Log& log, const std::vector<std::string>& args,
               const std::string& config)
{
    o.protocol.success_metric = success_metric_from_string(o.metric);
    o.protocol.threads = 1;
    validate(o.protocol);
    std::vector<Algorithm> algorithms;
    if (o.algorithm == "both")
        algorithms = {Algorithm::DE, Algorithm::CMAES};
    else
        algorithms = {algorithm_from_string(o.algorithm)};

    const auto sources = collect_sources(o.instances, o.corpus);
    std::vector<LoadedInstance> loaded;
    for (const auto& s : sources)
        loaded.push_back(load(s));

    const std::size_t jobs = sources.size() * algorithms.size();
    std::vector<InstancePerformance> results(jobs);
    parallel_for(jobs, g.threads, [&](std::size_t j) {
        const std::size_t i = j / algorithms.size();
        results[j] = measure(loaded[i].instance, algorithms[j % algorithms.size()], o.protocol,
                             hash_tag(sources[i].id));
    });

    CsvTable table;
    table.header = {"instance_id", "algorithm", "success_rate", "conv_time", "trials", "budget"};
    CsvTable trials;
    trials.header = {"instance_id", "algorithm", "trial", "success", "evals_used", "converged", "best_f"};
    for (std::size_t j = 0; j < jobs; ++j) {
        const auto& src = sources[j / algorithms.size()];
        const auto& r = results[j];
        const std::string alg = to_string(r.algorithm);
        table.rows.push_back({src.id, alg, format_double(r.success_rate), format_double(r.conv_time),
                              std::to_string(r.trials.size()),
                              std::to_string(o.protocol.budget(loaded[j / algorithms.size()].instance.dim()))});
        for (std::size_t t = 0; t < r.trials.size(); ++t) {
            const auto& tr = r.trials[t];
            trials.rows.push_back({src.id, alg, std::to_string(t), tr.success ? "1" : "0",
                                   std::to_string(tr.evals_used), tr.converged ? "1" : "0", format_double(tr.best_f)});
        }
    }
    const fs::path out = or_default(o.out, "bench.csv");
    write_text(out, to_csv(table));
    if (!o.trials_out.empty())
        write_text(o.trials_out, to_csv(trials));
    write_manifest(fs::path(out).replace_extension(".manifest.json"), "bench", args, config,
                   {{"instances", sources.size()}, {"rows", jobs}});
    log.info("bench", {{"path", out.string()}, {"rows", jobs}});
}

// ---------------------------------------------------------------------------------------------

struct AnalyzeOptions {
    std::string features;
    std::string corpus;
    std::vector<std::string> performance;
    std::string out_dir;
};

void run_analyze(const AnalyzeOptions& o, const Log& log, const std::vector<std::string>& args,
                 const std::string& config)
{
    fs::path features_path = o.features;
    if (features_path.empty()) {
        if (o.corpus.empty())
            throw ValidationError("analyze: need --features or --corpus");
        features_path = fs::path(o.corpus) / "features.csv";
    }
    const auto corpus = read_feature_table(features_path);
    std::vector<PerformanceRow> performance;
    for (const auto& p : o.performance) {
        auto rows = read_performance(p);
        performance.insert(performance.end(), rows.begin(), rows.end());
    }
    const fs::path dir = or_default(o.out_dir, "analysis");

    // Coverage per (mode, d, m).
    std::map<std::tuple<std::string, std::size_t, std::size_t>, std::vector<FeaturePoint>> groups;
    for (const auto& e : corpus)
        groups[{e.mode, e.dim, e.components}].push_back({e.features.num_nodes, e.features.global_funnel_size});
    json cov = json::array();
    CsvTable cells;
    cells.header = {"mode", "d", "m", "node_bin", "funnel_bin", "count"};
    for (const auto& [key, points] : groups) {
        const auto& [mode, d, m] = key;
        const CoverageGrid grid = coverage(points, m);
        cov.push_back({{"mode", mode}, {"d", d}, {"m", m}, {"instances", grid.instances}, {"coverage", grid.coverage}});
        for (std::size_t a = 0; a < CoverageGrid::bins; ++a) {
            for (std::size_t b = 0; b < CoverageGrid::bins; ++b) {
                if (grid.at(a, b) != 0)
                    cells.rows.push_back({mode, std::to_string(d), std::to_string(m), std::to_string(a),
                                          std::to_string(b), std::to_string(grid.at(a, b))});
            }
        }
    }
    write_text(dir / "coverage.json", json{{"bins", CoverageGrid::bins}, {"groups", cov}}.dump(2) + "\n");
    write_text(dir / "coverage_cells.csv", to_csv(cells));

    json summary = {{"instances", corpus.size()}, {"coverage", cov}};
    if (!performance.empty()) {
        const ExportResult exported = export_dataset(corpus, performance);
        write_text(dir / "dataset.csv", dataset_to_csv(exported.records));

        CsvTable corr;
        corr.header = {"feature", "metric", "algorithm", "d", "rho", "samples"};
        for (const auto& e : correlation_table(exported.records))
            corr.rows.push_back({e.feature, e.metric, e.algorithm, std::to_string(e.dim),
                                 e.rho ? format_double(*e.rho) : "", std::to_string(e.samples)});
        write_text(dir / "correlation.csv", to_csv(corr));

        CsvTable heat;
        heat.header = {"algorithm", "node_bin", "funnel_bin", "instances", "median_success"};
        for (const auto& c : success_heatmap(exported.records))
            heat.rows.push_back({c.algorithm, std::to_string(c.node_bin), std::to_string(c.funnel_bin),
                                 std::to_string(c.instances), format_double(c.median_success)});
        write_text(dir / "heatmap.csv", to_csv(heat));
        summary["dataset_rows"] = exported.records.size();
        summary["missing_performance"] = exported.missing;
        if (exported.missing != 0)
            log.info("analyze.missing", {{"rows", exported.missing}});
    }
    write_manifest(dir / "manifest.json", "analyze", args, config, summary);
    log.info("analyze", {{"dir", dir.string()}, {"instances", corpus.size()}});
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"MSG landscapes, local optima networks, novelty search and optimizer benchmarks", tool_name};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI/TOML file with option defaults; command-line flags take precedence");
    Global g;
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();
    app.add_flag("--log-json", g.log_json, "Log one JSON object per line on stderr");

    GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "Write MSG instance files");
    generate->add_option("--d", gen.d, "Dimension")->capture_default_str();
    generate->add_option("--m", gen.m, "Components (0 = 50 d)")->capture_default_str();
    generate->add_option("--seed", gen.seed, "Seed")->capture_default_str();
    generate->add_option("--kind", gen.kind, "random | unimodal | unisink | multisink")->capture_default_str();
    generate->add_option("--count", gen.count, "Number of instances (written to --out-dir)")->capture_default_str();
    generate->add_option("--out", gen.out, "Instance file (single instance)");
    generate->add_option("--out-dir", gen.out_dir, "Corpus directory");

    LonOptions lo;
    auto* lon = app.add_subcommand("lon", "Build LONs and their features");
    lon->add_option("--instance", lo.instances, "Instance file(s)");
    lon->add_option("--corpus", lo.corpus, "Corpus directory (reads instances/*.json)");
    lon->add_option("--samples", lo.samples, "Escape samples per optimum (0 = 500 d)")->capture_default_str();
    lon->add_option("--radius", lo.radius, "Escape radius (0 = (1/m)^(1/d))")->capture_default_str();
    lon->add_option("--seed", lo.seed, "Sampling seed (default: the instance's seed)");
    lon->add_option("--variant", lo.variant, "Graph to write: full | monotonic | funnel")->capture_default_str();
    lon->add_option("--out-dir", lo.out_dir, "Output directory");

    BoaOptions bo;
    auto* boa = app.add_subcommand("validate-boa", "Compare region-merge basins with gradient ascent");
    boa->add_option("--instance", bo.instances, "Instance file(s) instead of random ones");
    boa->add_option("--corpus", bo.corpus, "Corpus directory instead of random instances");
    boa->add_option("--d", bo.d, "Dimension of random instances")->capture_default_str();
    boa->add_option("--m", bo.m, "Components (0 = 50 d)")->capture_default_str();
    boa->add_option("--instances", bo.count, "Number of random instances")->capture_default_str();
    boa->add_option("--seed", bo.seed, "Seed for random instances")->capture_default_str();
    boa->add_option("--eta", bo.eta, "Step size")->capture_default_str();
    boa->add_option("--steps", bo.steps, "Maximum ascent steps")->capture_default_str();
    boa->add_option("--starts-per-dim", bo.starts_per_dim, "Sobol' starts per dimension")->capture_default_str();
    boa->add_option("--out", bo.out, "Per-instance CSV");
    boa->add_option("--raster", bo.raster, "PGM basin map of the first instance (d = 2)");
    boa->add_option("--raster-size", bo.raster_size, "Raster width and height")->capture_default_str();

    NsOptions no;
    auto* ns = app.add_subcommand("ns", "Generate a corpus by novelty search or at random");
    ns->add_option("--mode", no.mode, "random | ns | ns-plus")->capture_default_str();
    ns->add_option("--d", no.config.dim, "Dimension")->capture_default_str();
    ns->add_option("--m", no.config.components, "Components (0 = 50 d)")->capture_default_str();
    ns->add_option("--mu", no.config.mu, "Population size")->capture_default_str();
    ns->add_option("--lambda", no.config.lambda, "Offspring per generation")->capture_default_str();
    ns->add_option("--t-max", no.config.t_max, "Generations")->capture_default_str();
    ns->add_option("--k", no.config.k, "Nearest neighbours for novelty")->capture_default_str();
    ns->add_option("--rho-min", no.config.rho_min_init, "Initial archive threshold")->capture_default_str();
    ns->add_option("--alpha-w", no.config.alpha_w, "Weight mutation scale")->capture_default_str();
    ns->add_option("--alpha-sigma", no.config.alpha_sigma, "Sigma mutation scale")->capture_default_str();
    ns->add_option("--lon-samples", no.config.lon_samples, "Escape samples (0 = 500 d)")->capture_default_str();
    ns->add_option("--seed", no.config.seed, "Seed")->capture_default_str();
    ns->add_option("--out-dir", no.out_dir, "Corpus directory");

    BenchOptions be;
    auto* bench = app.add_subcommand("bench", "Run DE and CMA-ES trials");
    bench->add_option("--instance", be.instances, "Instance file(s)");
    bench->add_option("--corpus", be.corpus, "Corpus directory");
    bench->add_option("--algorithm", be.algorithm, "de | cmaes | both")->capture_default_str();
    bench->add_option("--trials", be.protocol.trials, "Trials per instance")->capture_default_str();
    bench->add_option("--budget-per-dim", be.protocol.budget_per_dim, "Evaluations per dimension")
        ->capture_default_str();
    bench->add_option("--success-tol", be.protocol.success_tol, "Distance to the global optimum")
        ->capture_default_str();
    bench->add_option("--metric", be.metric, "euclidean | max")->capture_default_str();
    bench->add_option("--conv-tol-x", be.protocol.conv_tol_x, "Convergence spread in x")->capture_default_str();
    bench->add_option("--conv-tol-f", be.protocol.conv_tol_f, "Convergence spread in f")->capture_default_str();
    bench->add_option("--sigma0", be.protocol.cma_sigma0, "CMA-ES initial step size")->capture_default_str();
    bench->add_option("--seed", be.protocol.seed, "Seed")->capture_default_str();
    bench->add_option("--out", be.out, "Per-instance CSV");
    bench->add_option("--trials-out", be.trials_out, "Per-trial CSV");

    AnalyzeOptions an;
    auto* analyze = app.add_subcommand("analyze", "Coverage, correlations, heat map and dataset export");
    analyze->add_option("--features", an.features, "features.csv of a corpus");
    analyze->add_option("--corpus", an.corpus, "Corpus directory (reads features.csv)");
    analyze->add_option("--performance", an.performance, "bench CSV file(s)");
    analyze->add_option("--out-dir", an.out_dir, "Output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << tool_name << ": " << e.what() << "\n";
        err << "Run with --help for usage.\n";
        return usage_error;
    }

    const Log log(err, g.log_json);
    const std::string config = app.config_to_str(true, false);
    try {
        if (generate->parsed())
            run_generate(gen, log, args, config);
        else if (lon->parsed())
            run_lon(lo, g, log, args, config);
        else if (boa->parsed())
            run_validate_boa(bo, g, log, args, config);
        else if (ns->parsed())
            run_ns(no, g, log, args, config);
        else if (bench->parsed())
            run_bench(be, g, log, args, config);
        else if (analyze->parsed())
            run_analyze(an, log, args, config);
    } catch (const IoError& e) {
        log.info("error", {{"kind", "io"}, {"message", e.what()}});
        return io_error;
    } catch (const ValidationError& e) {
        log.info("error", {{"kind", "validation"}, {"message", e.what()}});
        return validation_error;
    } catch (const StructuralError& e) {
        log.info("error", {{"kind", "validation"}, {"message", e.what()}});
        return validation_error;
    } catch (const CapabilityError& e) {
        log.info("error", {{"kind", "validation"}, {"message", e.what()}});
        return validation_error;
    } catch (const std::exception& e) {
        log.info("error", {{"kind", "internal"}, {"message", e.what()}});
        return failure;
    }
    return ok;
}

int dispatch(int argc, char** argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return dispatch(args, std::cout, std::cerr);
}

} // namespace msglon::cli
