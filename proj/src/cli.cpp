#include "covertime/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "covertime/analytic.hpp"
#include "covertime/errors.hpp"
#include "covertime/simulate.hpp"
#include "covertime/stats.hpp"
#include "covertime/verify.hpp"

namespace covertime::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 42;

enum class Format { csv, json };

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

double parse_double(std::string_view text) {
    std::string owned(text);
    char* end = nullptr;
    const double value = std::strtod(owned.c_str(), &end);
    if (owned.empty() || end != owned.c_str() + owned.size() || !std::isfinite(value)) {
        throw DomainError("not a finite number: '" + owned + "'");
    }
    return value;
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string quoted = "\"";
    for (const char ch : text) {
        if (ch == '"') {
            quoted += '"';
        }
        quoted += ch;
    }
    return quoted + "\"";
}

// nlohmann prints shortest round-trip floats; numbers here always carry 17
// significant digits, so the tree is serialized by hand.
void write_json(std::ostream& os, const Json& value) {
    switch (value.type()) {
        case Json::value_t::object: {
            os << '{';
            bool first = true;
            for (const auto& [key, item] : value.items()) {
                os << (first ? "" : ",") << Json(key).dump() << ':';
                write_json(os, item);
                first = false;
            }
            os << '}';
            break;
        }
        case Json::value_t::array: {
            os << '[';
            bool first = true;
            for (const auto& item : value) {
                os << (first ? "" : ",");
                write_json(os, item);
                first = false;
            }
            os << ']';
            break;
        }
        case Json::value_t::number_float: {
            const double x = value.get<double>();
            if (std::isfinite(x)) {
                os << format_number(x);
            } else {
                os << "null";
            }
            break;
        }
        default:
            os << value.dump();
    }
}

Json table_json(const Table& table) {
    Json rows = Json::array();
    for (const auto& row : table.rows) {
        Json object = Json::object();
        for (std::size_t i = 0; i < table.columns.size(); ++i) {
            object[table.columns[i]] = row[i];
        }
        rows.push_back(std::move(object));
    }
    return rows;
}

void write_table_csv(std::ostream& os, const Table& table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        os << (i ? "," : "") << table.columns[i];
    }
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << format_number(row[i]);
        }
        os << '\n';
    }
}

// Key/value section; separated by a blank line when it follows a data table.
void write_summary_csv(std::ostream& os, const std::vector<std::pair<std::string, Json>>& entries,
                       bool after_table) {
    os << (after_table ? "\n" : "") << "key,value\n";
    for (const auto& [key, value] : entries) {
        os << csv_field(key) << ',';
        if (value.is_boolean()) {
            os << (value.get<bool>() ? "true" : "false");
        } else if (value.is_null()) {
        } else if (value.is_string()) {
            os << csv_field(value.get<std::string>());
        } else {
            write_json(os, value);
        }
        os << '\n';
    }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) {
        return *flag;
    }
    if (const char* env = std::getenv("COVERTIME_SEED"); env != nullptr && *env != '\0') {
        std::uint64_t seed = 0;
        const std::string_view text(env);
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            throw DomainError("COVERTIME_SEED is not an unsigned 64-bit integer: '" +
                              std::string(text) + "'");
        }
        return seed;
    }
    return kDefaultSeed;
}

std::vector<double> grid_from(const std::string& grid, const std::string& list, const char* name) {
    if (grid.empty() == list.empty()) {
        throw DomainError(std::string("give exactly one of --") + name + " or --" + name + "-grid");
    }
    return parse_grid(grid.empty() ? list : grid);
}

struct Common {
    double L = 1.0;
    std::string format = "csv";
    std::string out_path;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& common, bool with_seed) {
    cmd->add_option("--L", common.L, "circumference / target range length")->capture_default_str();
    cmd->add_option("--format", common.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", common.out_path, "write output to this file instead of stdout");
    if (with_seed) {
        cmd->add_option("--seed", common.seed,
                        "64-bit seed (default: $COVERTIME_SEED, else 42)");
    }
}

class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) {
                throw DomainError("cannot open output file '" + path + "'");
            }
            stream_ = file_.get();
        }
    }
    std::ostream& stream() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

void emit_table(const Common& common, const Table& table, std::ostream& out) {
    Sink sink(common.out_path, out);
    if (common.format == "json") {
        write_json(sink.stream(), table_json(table));
        sink.stream() << '\n';
    } else {
        write_table_csv(sink.stream(), table);
    }
}

Json summary_object(const std::vector<std::pair<std::string, Json>>& entries) {
    Json object = Json::object();
    for (const auto& [key, value] : entries) {
        object[key] = value;
    }
    return object;
}

struct SimulateArgs {
    std::size_t n = 1000;
    double dt = 1e-4;
    bool no_bridge = false;
    std::size_t streams = 0;
    bool summary_only = false;
    std::string s_list = "0.5,1";
};

int cmd_simulate(const Common& common, const SimulateArgs& args, std::ostream& out) {
    if (args.n < 1) {
        throw DomainError("--n must be at least 1");
    }
    const std::vector<double> s_values = parse_grid(args.s_list);
    simulate::SimPlan plan;
    plan.n_samples = args.n;
    plan.dt = args.dt;
    plan.bridge_correction = !args.no_bridge;
    plan.base_seed = resolve_seed(common.seed);
    plan.n_streams = args.streams > 0 ? args.streams
                                      : std::max(1u, std::thread::hardware_concurrency());
    const double L = common.L;
    const auto samples = simulate::sample_cover_times(plan, L);

    const double n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (const auto& sample : samples) {
        sum += sample.theta;
    }
    const double mean = sum / n;
    double squares = 0.0;
    for (const auto& sample : samples) {
        squares += (sample.theta - mean) * (sample.theta - mean);
    }
    const double variance = samples.size() > 1 ? squares / (n - 1.0) : 0.0;

    std::vector<std::pair<std::string, Json>> entries{
        {"n", static_cast<std::uint64_t>(samples.size())},
        {"L", L},
        {"dt", plan.dt},
        {"bridge_correction", plan.bridge_correction},
        {"seed", plan.base_seed},
        {"mean", mean},
        {"variance", variance},
        {"analytic_mean", analytic::moments_thetaL(L).mean},
        {"analytic_variance", analytic::moments_thetaL(L).variance},
    };
    Json transforms = Json::array();
    std::vector<std::pair<std::string, Json>> transform_entries;
    for (const double s : s_values) {
        if (s < 0.0) {
            throw DomainError("transform arguments must be >= 0");
        }
        const auto estimate = simulate::estimate_transform(samples, s);
        const double exact = analytic::laplace_theta(TransformQuery::at(s), L);
        transforms.push_back(Json{{"s", s},
                                  {"estimate", estimate.estimate},
                                  {"std_error", estimate.std_error},
                                  {"analytic", exact}});
        const std::string tag = "(" + format_number(s) + ")";
        transform_entries.emplace_back("transform" + tag, estimate.estimate);
        transform_entries.emplace_back("transform_std_error" + tag, estimate.std_error);
        transform_entries.emplace_back("transform_analytic" + tag, exact);
    }

    Json ks = nullptr;
    if (samples.size() >= 10) {
        auto sorted = simulate::thetas(samples);
        std::sort(sorted.begin(), sorted.end());
        const auto report = stats::ks_test(sorted, [L](double t) {
            return t > 0.0 ? analytic::cdf_thetaL(t, L) : 0.0;
        });
        ks = Json{{"statistic", report.statistic},
                  {"p_value", report.p_value.value_or(0.0)},
                  {"pass", report.pass}};
    }

    Sink sink(common.out_path, out);
    std::ostream& os = sink.stream();
    Table table{{"index", "theta"}, {}};
    if (!args.summary_only) {
        table.rows.reserve(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            table.rows.push_back({static_cast<double>(i), samples[i].theta});
        }
    }

    if (common.format == "json") {
        Json summary = summary_object(entries);
        summary["transform"] = transforms;
        summary["ks"] = ks;
        Json doc = Json::object();
        if (!args.summary_only) {
            Json rows = Json::array();
            for (std::size_t i = 0; i < samples.size(); ++i) {
                rows.push_back(Json{{"index", static_cast<std::uint64_t>(i)},
                                    {"theta", samples[i].theta}});
            }
            doc["samples"] = rows;
        }
        doc["summary"] = summary;
        write_json(os, doc);
        os << '\n';
    } else {
        if (!args.summary_only) {
            write_table_csv(os, table);
        }
        entries.insert(entries.end(), transform_entries.begin(), transform_entries.end());
        if (!ks.is_null()) {
            entries.emplace_back("ks_statistic", ks["statistic"]);
            entries.emplace_back("ks_p_value", ks["p_value"]);
            entries.emplace_back("ks_pass", ks["pass"]);
        }
        write_summary_csv(os, entries, !args.summary_only);
    }
    return kExitOk;
}

struct SwitchbackArgs {
    double a = 0.0;
    std::size_t n = 100000;
    std::size_t streams = 0;
};

int cmd_switchbacks(const Common& common, const SwitchbackArgs& args, std::ostream& out) {
    if (args.n < 1) {
        throw DomainError("--n must be at least 1");
    }
    if (!(args.a <= common.L)) {
        throw DomainError("--a must not exceed --L");
    }
    const RangeState range = RangeState::make(args.a, common.L);
    simulate::SimPlan plan;
    plan.n_samples = args.n;
    plan.base_seed = resolve_seed(common.seed);
    plan.n_streams = args.streams > 0 ? args.streams
                                      : std::max(1u, std::thread::hardware_concurrency());
    const auto counts = simulate::switchback_histogram(plan, range);
    const double lambda = range.switchback_rate();
    const double n = static_cast<double>(args.n);

    Table table{{"k", "count", "expected"}, {}};
    for (std::size_t k = 0; k < counts.size(); ++k) {
        table.rows.push_back({static_cast<double>(k), static_cast<double>(counts[k]),
                              n * analytic::switchback_pmf(static_cast<long>(k), range)});
    }

    std::vector<std::pair<std::string, Json>> entries{
        {"n", static_cast<std::uint64_t>(args.n)},
        {"a", range.a},
        {"L", range.L},
        {"lambda", lambda},
        {"seed", plan.base_seed},
    };
    Json chi = nullptr;
    if (args.n >= 100) {
        const auto report = stats::chi_square_poisson(counts, lambda);
        chi = Json{{"statistic", report.statistic},
                   {"p_value", report.p_value.value_or(0.0)},
                   {"pass", report.pass}};
    }

    Json pgf = Json::array();
    std::vector<std::pair<std::string, Json>> pgf_entries;
    for (const double t : {0.25, 0.5, 0.75}) {
        double mean = 0.0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            mean += static_cast<double>(counts[k]) * std::pow(t, static_cast<double>(k));
        }
        mean /= n;
        double squares = 0.0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            const double d = std::pow(t, static_cast<double>(k)) - mean;
            squares += static_cast<double>(counts[k]) * d * d;
        }
        const double se = args.n > 1 ? std::sqrt(squares / (n - 1.0) / n) : 0.0;
        const double exact = analytic::switchback_pgf(PgfQuery::for_range(t, range));
        pgf.push_back(Json{{"t", t}, {"empirical", mean}, {"std_error", se}, {"analytic", exact}});
        const std::string tag = "(" + format_number(t) + ")";
        pgf_entries.emplace_back("pgf" + tag, mean);
        pgf_entries.emplace_back("pgf_std_error" + tag, se);
        pgf_entries.emplace_back("pgf_analytic" + tag, exact);
    }

    Sink sink(common.out_path, out);
    std::ostream& os = sink.stream();
    if (common.format == "json") {
        Json summary = summary_object(entries);
        summary["chi_square"] = chi;
        summary["pgf"] = pgf;
        Json doc = Json::object();
        doc["histogram"] = table_json(table);
        doc["summary"] = summary;
        write_json(os, doc);
        os << '\n';
    } else {
        write_table_csv(os, table);
        if (!chi.is_null()) {
            entries.emplace_back("chi_square_statistic", chi["statistic"]);
            entries.emplace_back("chi_square_p_value", chi["p_value"]);
            entries.emplace_back("chi_square_pass", chi["pass"]);
        }
        entries.insert(entries.end(), pgf_entries.begin(), pgf_entries.end());
        write_summary_csv(os, entries, true);
    }
    return kExitOk;
}

struct VerifyArgs {
    bool full = false;
    std::string mutant = "none";
    std::size_t workers = 0;
    std::string format = "json";
};

int cmd_verify(const Common& common, const VerifyArgs& args, std::ostream& out) {
    const auto mutant = verify::parse_mutant(args.mutant);
    if (!mutant) {
        throw DomainError("unknown mutant '" + args.mutant + "'");
    }
    verify::Options options;
    options.seed = resolve_seed(common.seed);
    options.full = args.full;
    options.mutant = *mutant;
    options.workers = args.workers > 0 ? args.workers
                                       : std::max(1u, std::thread::hardware_concurrency());
    const auto results = verify::run_suite(options);
    const bool passed = verify::all_passed(results);

    Sink sink(common.out_path, out);
    std::ostream& os = sink.stream();
    if (args.format == "csv") {
        os << "id,pass,value,threshold,title,detail\n";
        for (const auto& r : results) {
            os << r.id << ',' << (r.pass ? "true" : "false") << ',' << format_number(r.value)
               << ',' << format_number(r.threshold) << ',' << csv_field(r.title) << ','
               << csv_field(r.detail) << '\n';
        }
    } else {
        Json checks = Json::array();
        for (const auto& r : results) {
            checks.push_back(Json{{"id", r.id},
                                  {"title", r.title},
                                  {"pass", r.pass},
                                  {"value", r.value},
                                  {"threshold", r.threshold},
                                  {"detail", r.detail}});
        }
        Json doc = Json::object();
        doc["suite"] = args.full ? "full" : "fast";
        doc["seed"] = options.seed;
        doc["mutant"] = std::string(verify::mutant_name(options.mutant));
        doc["passed"] = passed;
        doc["checks"] = checks;
        write_json(os, doc);
        os << '\n';
    }
    return passed ? kExitOk : kExitVerifyFailed;
}

}  // namespace

std::string format_number(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", x);
    return buffer;
}

std::vector<double> parse_grid(std::string_view text) {
    std::vector<double> values;
    if (text.find(':') != std::string_view::npos) {
        std::vector<std::string_view> parts;
        std::size_t begin = 0;
        for (std::size_t pos; (pos = text.find(':', begin)) != std::string_view::npos;
             begin = pos + 1) {
            parts.push_back(text.substr(begin, pos - begin));
        }
        parts.push_back(text.substr(begin));
        if (parts.size() != 3) {
            throw DomainError("grid must look like start:stop:step, got '" + std::string(text) + "'");
        }
        const double start = parse_double(parts[0]);
        const double stop = parse_double(parts[1]);
        const double step = parse_double(parts[2]);
        if (!(step > 0.0) || stop < start) {
            throw DomainError("grid needs step > 0 and stop >= start");
        }
        const double count = std::floor((stop - start) / step + 1e-9) + 1.0;
        if (count > 1e8) {
            throw DomainError("grid has too many points");
        }
        for (long i = 0; i < static_cast<long>(count); ++i) {
            values.push_back(start + static_cast<double>(i) * step);
        }
    } else {
        std::size_t begin = 0;
        while (begin <= text.size()) {
            const std::size_t pos = std::min(text.find(',', begin), text.size());
            values.push_back(parse_double(text.substr(begin, pos - begin)));
            begin = pos + 1;
        }
    }
    if (values.empty()) {
        throw DomainError("grid is empty");
    }
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) {
            throw DomainError("grid must be strictly increasing");
        }
    }
    return values;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cover time of a circle by Brownian motion: analytic tables, simulation, verification",
                 "covertime"};
    app.require_subcommand(1);

    Common common;
    std::string t_grid;
    std::string t_list;
    std::string s_grid;
    std::string s_list;
    std::string p_grid;
    std::string p_list;
    const std::string grid_help = "grid start:stop:step (start included, stop included when hit "
                                  "within 1e-9 step)";

    auto* density = app.add_subcommand("density", "density of theta_L on a time grid");
    add_common(density, common, false);
    density->add_option("--t-grid", t_grid, grid_help);
    density->add_option("--t", t_list, "comma-separated times");

    auto* cdf = app.add_subcommand("cdf", "distribution function of theta_L on a time grid");
    add_common(cdf, common, false);
    cdf->add_option("--t-grid", t_grid, grid_help);
    cdf->add_option("--t", t_list, "comma-separated times");

    auto* laplace = app.add_subcommand("laplace", "E[exp(-s theta_L)] on an s grid");
    add_common(laplace, common, false);
    laplace->add_option("--s-grid", s_grid, grid_help);
    laplace->add_option("--s", s_list, "comma-separated Laplace arguments");

    auto* quantile = app.add_subcommand("quantile", "quantiles of theta_L");
    add_common(quantile, common, false);
    quantile->add_option("--p-grid", p_grid, grid_help);
    quantile->add_option("--p", p_list, "comma-separated probabilities in (0, 1)");

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo cover times with summary and KS report");
    add_common(sim, common, true);
    sim->add_option("--n", sim_args.n, "number of samples")->capture_default_str();
    sim->add_option("--dt", sim_args.dt, "time step (must be < L^2/4)")->capture_default_str();
    sim->add_flag("--no-bridge", sim_args.no_bridge, "disable the Brownian-bridge correction");
    sim->add_option("--streams", sim_args.streams, "worker threads (0 = hardware concurrency)");
    sim->add_flag("--summary-only", sim_args.summary_only, "omit the per-sample rows");
    sim->add_option("--s", sim_args.s_list, "Laplace arguments for the empirical transform")
        ->capture_default_str();

    SwitchbackArgs sb_args;
    auto* sb = app.add_subcommand("switchbacks", "switchback histogram vs Poisson(log(L/a))");
    add_common(sb, common, true);
    sb->add_option("--a", sb_args.a, "initial range length, 0 < a <= L")->required();
    sb->add_option("--n", sb_args.n, "number of chains")->capture_default_str();
    sb->add_option("--streams", sb_args.streams, "worker threads (0 = hardware concurrency)");

    VerifyArgs verify_args;
    auto* ver = app.add_subcommand("verify", "run the verification suite (JSON report by default)");
    ver->add_option("--seed", common.seed, "64-bit seed (default: $COVERTIME_SEED, else 42)");
    ver->add_option("--out", common.out_path, "write the report to this file");
    ver->add_option("--format", verify_args.format, "report format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    ver->add_flag("--full", verify_args.full, "also run the statistical suites");
    ver->add_option("--mutant", verify_args.mutant,
                    "mutation test: none, pgf-sign or density-square")
        ->capture_default_str();
    ver->add_option("--workers", verify_args.workers, "worker threads (0 = hardware concurrency)");

    std::vector<std::string> owned{"covertime"};
    owned.insert(owned.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& arg : owned) {
        argv.push_back(arg.data());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e, out, err);
        }
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        auto analytic_table = [&](const std::vector<double>& grid, const std::string& x_name,
                                  const std::string& y_name, auto&& fn) {
            Table table{{x_name, y_name}, {}};
            for (const double x : grid) {
                table.rows.push_back({x, fn(x)});
            }
            emit_table(common, table, out);
            return kExitOk;
        };
        const double L = common.L;
        if (density->parsed()) {
            return analytic_table(grid_from(t_grid, t_list, "t"), "t", "p_theta_L",
                                  [L](double t) { return analytic::density_thetaL(t, L).value; });
        }
        if (cdf->parsed()) {
            return analytic_table(grid_from(t_grid, t_list, "t"), "t", "cdf_theta_L",
                                  [L](double t) { return analytic::cdf_thetaL(t, L); });
        }
        if (laplace->parsed()) {
            return analytic_table(grid_from(s_grid, s_list, "s"), "s", "laplace_theta_L",
                                  [L](double s) {
                                      return analytic::laplace_theta(TransformQuery::at(s), L);
                                  });
        }
        if (quantile->parsed()) {
            return analytic_table(grid_from(p_grid, p_list, "p"), "p", "quantile_theta_L",
                                  [L](double p) {
                                      if (!(L > 0.0) || !std::isfinite(L)) {
                                          throw DomainError("circumference L must be positive");
                                      }
                                      return L * L * analytic::quantile_theta1(p);
                                  });
        }
        if (sim->parsed()) {
            return cmd_simulate(common, sim_args, out);
        }
        if (sb->parsed()) {
            return cmd_switchbacks(common, sb_args, out);
        }
        return cmd_verify(common, verify_args, out);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const AccuracyError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace covertime::cli
