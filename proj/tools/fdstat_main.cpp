// fdstat: stationarity tests, simulation and Monte Carlo experiments for
// functional time series.
//
// Exit codes: 0 success (whatever the test decision), 2 input or
// configuration error, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdstat/csvio.hpp"
#include "fdstat/dgp.hpp"
#include "fdstat/mcharness.hpp"
#include "fdstat/teststat.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fdstat;

namespace {

struct Key {
    std::string name;
    std::string def;
    std::string help;
};

// Every config key with its default; flags are the key with '_' -> '-'.
const std::vector<Key>& keys()
{
    static const std::vector<Key> k = {
        {"input", "", "input CSV (curve samples tau_* or coefficients c*)"},
        {"output", "", "simulate: output CSV path (stdout when empty)"},
        {"out_dir", "", "output directory (env FDSTAT_OUT_DIR)"},
        {"threads", "1", "worker threads, 0 = all cores (env FDSTAT_THREADS)"},
        {"verbose", "false", "progress on stderr"},
        // test
        {"variant", "eigen", "eigen | fixed"},
        {"M", "1,5", "number of lags; a list runs one test per value"},
        {"lags", "", "explicit lags, overrides M (e.g. 1,2,4)"},
        {"b", "0", "spectral bandwidth in radians, 0 = 2pi T^(-1/5)"},
        {"b4", "0", "tri-spectrum bandwidth in radians, 0 = 2pi T^(-1/6)"},
        {"L", "0", "eigen: components, fixed: directions; 0 = data driven"},
        {"fixed_threshold", "0.9", "fixed: energy share selecting directions"},
        {"alpha", "0.05", "extra test level reported as reject_alpha"},
        {"fourth_order", "true", "include the fourth-order variance term"},
        {"guard", "2", "manifold guard band in frequency indices"},
        {"fourth_clip", "1", "cap |fourth| <= clip * second, negative disables"},
        {"second_order", "plugin", "plugin | analytic"},
        {"sigma_floor", "1e-8", "floor on the diagonal of Sigma"},
        {"floor_budget", "0.05", "tolerated share of floored eigenvalues"},
        {"dft", "auto", "auto | fft | direct"},
        {"demean", "true", "demean curve input before testing"},
        {"n_basis", "15", "basis size for curve input"},
        {"zeta1", "0.7", "aTVE lower threshold"},
        {"zeta2", "0.9", "aTVE upper threshold"},
        {"xi", "0.15", "eigenvalue share threshold"},
        {"xi1", "0.5", "relaxed threshold 1"},
        {"xi2", "0.25", "relaxed threshold 2"},
        {"xi3", "0.125", "relaxed threshold 3"},
        {"zeta2_fast", "0.995", "aTVE threshold under fast decay"},
        {"xi_fast", "0.01", "eigenvalue threshold under fast decay"},
        // dgp
        {"model", "a", "model id a..h"},
        {"T", "256", "sample size"},
        {"L_max", "15", "simulated basis size"},
        {"law", "gaussian", "gaussian | t | beta66 (g, h default to t)"},
        {"df", "0", "t degrees of freedom, 0 = model default (g 19, h 10)"},
        {"burn_in", "200", "burn-in length"},
        {"seed", "20240601", "master seed"},
        {"sqrt_abs_variance", "false", "model d/h: scale by sqrt|sigma^2(t)|"},
        // mc / contour
        {"preset", "", "table1-quick | table1-full | table3-quick | table3-full | table4-quick | table4-full"},
        {"models", "a", "mc: model list"},
        {"Ts", "256", "mc: sample size list"},
        {"variants", "eigen", "mc: variant list"},
        {"R", "200", "replications per cell"},
        {"failure_budget", "0.01", "tolerated share of failed replications"},
        {"allow_T1024", "false", "permit T >= 1024"},
        {"density", "false", "mc: write density_<cell>.csv per cell"},
        {"bins", "200", "density bins"},
        {"trim", "0", "density: drop this share of the largest Q"},
        {"G", "64", "contour grid size"},
    };
    return k;
}

std::string flag_of(const std::string& key)
{
    std::string f = key;
    for (char& c : f)
        if (c == '_') c = '-';
    return "--" + f;
}

using Values = std::map<std::string, std::string>;

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

double to_num(const Values& v, const std::string& k)
{
    const std::string& s = v.at(k);
    try {
        std::size_t pos = 0;
        const double x = std::stod(s, &pos);
        if (pos == s.size()) return x;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::argument, "key '" + k + "' expects a number, got '" + s + "'");
}

long to_long(const Values& v, const std::string& k)
{
    const double x = to_num(v, k);
    require(x == std::floor(x), ErrorKind::argument, "key '" + k + "' expects an integer");
    return static_cast<long>(x);
}

bool to_bool(const Values& v, const std::string& k)
{
    const std::string& s = v.at(k);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail(ErrorKind::argument, "key '" + k + "' expects true or false, got '" + s + "'");
}

template <typename T, typename Fn>
std::vector<T> to_list(const Values& v, const std::string& k, Fn parse)
{
    std::vector<T> out;
    for (const std::string& s : split_list(v.at(k))) out.push_back(parse(s));
    require(!out.empty() || v.at(k).empty(), ErrorKind::argument, "key '" + k + "' is empty");
    return out;
}

long parse_long(const std::string& s)
{
    try {
        std::size_t pos = 0;
        const long x = std::stol(s, &pos);
        if (pos == s.size()) return x;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::argument, "expected an integer, got '" + s + "'");
}

DftMethod parse_dft(const std::string& s)
{
    if (s == "auto") return DftMethod::automatic;
    if (s == "fft") return DftMethod::fft;
    if (s == "direct") return DftMethod::direct;
    fail(ErrorKind::argument, "dft must be auto, fft or direct");
}

SecondOrder parse_second(const std::string& s)
{
    if (s == "plugin") return SecondOrder::plugin;
    if (s == "analytic") return SecondOrder::analytic;
    fail(ErrorKind::argument, "second_order must be plugin or analytic");
}

TestConfig test_config(const Values& v)
{
    TestConfig c;
    c.variant = parse_variant(v.at("variant"));
    for (long h : to_list<long>(v, "lags", parse_long)) c.lags.push_back(static_cast<int>(h));
    c.b = to_num(v, "b");
    c.fixed_threshold = to_num(v, "fixed_threshold");
    c.alpha = to_num(v, "alpha");
    if (const long L = to_long(v, "L"); L > 0) c.L_override = static_cast<int>(L);
    c.sigma.b4 = to_num(v, "b4");
    c.sigma.fourth_order = to_bool(v, "fourth_order");
    c.sigma.guard = static_cast<int>(to_long(v, "guard"));
    c.sigma.fourth_clip = to_num(v, "fourth_clip");
    c.sigma.second_order = parse_second(v.at("second_order"));
    c.sigma.floor = to_num(v, "sigma_floor");
    c.sigma.floor_budget = to_num(v, "floor_budget");
    c.dft = parse_dft(v.at("dft"));
    c.tuning.zeta1 = to_num(v, "zeta1");
    c.tuning.zeta2 = to_num(v, "zeta2");
    c.tuning.xi = to_num(v, "xi");
    c.tuning.xi1 = to_num(v, "xi1");
    c.tuning.xi2 = to_num(v, "xi2");
    c.tuning.xi3 = to_num(v, "xi3");
    c.tuning.zeta2_fast = to_num(v, "zeta2_fast");
    c.tuning.xi_fast = to_num(v, "xi_fast");
    c.tuning.validate();
    c.threads = static_cast<int>(to_long(v, "threads"));
    c.sigma.threads = c.threads;
    return c;
}

std::vector<int> M_list(const Values& v)
{
    std::vector<int> Ms;
    for (long m : to_list<long>(v, "M", parse_long)) {
        require(m >= 1, ErrorKind::argument, "M must be >= 1");
        Ms.push_back(static_cast<int>(m));
    }
    require(!Ms.empty(), ErrorKind::argument, "M is empty");
    return Ms;
}

DgpSpec dgp_spec(const Values& v)
{
    DgpSpec d;
    d.model = parse_model(v.at("model"));
    d.T = to_long(v, "T");
    d.L_max = static_cast<int>(to_long(v, "L_max"));
    d.law = parse_law(v.at("law"));
    d.df = to_num(v, "df");
    d.burn_in = static_cast<int>(to_long(v, "burn_in"));
    d.seed = static_cast<std::uint64_t>(to_long(v, "seed"));
    d.sqrt_abs_variance = to_bool(v, "sqrt_abs_variance");
    require(d.T < 1024 || to_bool(v, "allow_T1024"), ErrorKind::configuration,
            "T >= 1024 is opt-in (--allow-T1024 true)");
    d.validate();
    return d;
}

void apply_preset(Values& v, const std::string& preset)
{
    const auto dash = preset.rfind('-');
    require(dash != std::string::npos, ErrorKind::argument, "unknown preset '" + preset + "'");
    const std::string table = preset.substr(0, dash);
    const std::string size = preset.substr(dash + 1);
    require(size == "quick" || size == "full", ErrorKind::argument,
            "preset size must be quick or full, got '" + size + "'");
    if (table == "table1") v["models"] = "a,b,c";
    else if (table == "table3") v["models"] = "d,e,f";
    else if (table == "table4") v["models"] = "g,h";
    else fail(ErrorKind::argument, "unknown preset '" + preset + "' (valid: table1, table3, table4 with -quick or -full)");
    v["Ts"] = "64,128,256,512";
    v["variants"] = "eigen,fixed";
    v["M"] = "1,5";
    v["R"] = size == "quick" ? "200" : "1000";
}

ExperimentSpec experiment_spec(const Values& v)
{
    ExperimentSpec e;
    e.models = to_list<Model>(v, "models", parse_model);
    e.Ts = to_list<long>(v, "Ts", parse_long);
    e.variants = to_list<Variant>(v, "variants", parse_variant);
    e.Ms = M_list(v);
    e.law = parse_law(v.at("law"));
    e.df = to_num(v, "df");
    e.burn_in = static_cast<int>(to_long(v, "burn_in"));
    e.L_max = static_cast<int>(to_long(v, "L_max"));
    e.R = static_cast<int>(to_long(v, "R"));
    e.seed = static_cast<std::uint64_t>(to_long(v, "seed"));
    e.test = test_config(v);
    e.test.threads = 1;
    e.test.sigma.threads = 1;
    e.threads = static_cast<int>(to_long(v, "threads"));
    e.failure_budget = to_num(v, "failure_budget");
    e.allow_T1024 = to_bool(v, "allow_T1024");
    e.keep_values = true;
    e.validate();
    return e;
}

json result_json(const TestResult& r)
{
    json d = {{"eigen_floor_hits", r.diagnostics.eigen_floor_hits},
              {"sigma_regularized", r.diagnostics.sigma_regularized},
              {"fourth_clipped", r.diagnostics.fourth_clipped},
              {"fast_decay", r.diagnostics.fast_decay},
              {"sigma_second", r.diagnostics.sigma_second},
              {"sigma_fourth", r.diagnostics.sigma_fourth}};
    json betas = json::array();
    for (const cplx& b : r.betas) betas.push_back({b.real(), b.imag()});
    json j = {{"variant", to_string(r.variant)},
              {"T", r.T},
              {"M", r.M},
              {"lags", r.lags},
              {"L", r.L},
              {"aTVE", r.aTVE},
              {"Q", r.Q},
              {"df", r.df},
              {"p", r.p},
              {"reject_05", r.reject_05},
              {"reject_01", r.reject_01},
              {"reject_alpha", r.reject_alpha},
              {"betas", betas},
              {"sigma", r.sigma},
              {"diagnostics", d}};
    if (r.variant == Variant::fixed) j["directions"] = r.directions;
    return j;
}

json cell_json(const CellSummary& c)
{
    return {{"model", to_string(c.model)}, {"T", c.T},           {"variant", to_string(c.variant)},
            {"M", c.M},                    {"R", c.R},           {"failures", c.failures},
            {"median_Q", c.median_Q},      {"mean_Q", c.mean_Q}, {"rej05", c.rej05},
            {"rej01", c.rej01},            {"avg_L", c.avg_L},   {"aTVE", c.aTVE},
            {"failure_messages", c.failure_messages}};
}

json config_json(const Values& v)
{
    json j = json::object();
    for (const auto& [k, val] : v) j[k] = val;
    return j;
}

std::string out_dir(const Values& v)
{
    const std::string& d = v.at("out_dir");
    return d.empty() ? std::string("fdstat_out") : d;
}

// Files are collected first and written only once every computation succeeded.
using Files = std::vector<std::pair<fs::path, std::string>>;

void write_files(const Files& files)
{
    for (const auto& [path, body] : files) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream f(path);
        require(f.good(), ErrorKind::input, "cannot write " + path.string());
        f << body;
    }
}

template <typename Fn>
std::string render(Fn writer)
{
    std::ostringstream ss;
    writer(ss);
    return ss.str();
}

int cmd_test(const Values& v)
{
    require(!v.at("input").empty(), ErrorKind::argument, "test needs --input");
    const CsvTable table = read_csv(v.at("input"));
    BasisDescriptor basis{static_cast<int>(to_long(v, "n_basis"))};
    const FunctionalSeries series = series_from_csv(table, basis, to_bool(v, "demean"));
    const TestConfig base = test_config(v);

    json results = json::array();
    if (!base.lags.empty()) {
        TestConfig c = base;
        c.M = static_cast<int>(c.lags.size());
        results.push_back(result_json(run_test(series, c)));
    } else {
        for (int M : M_list(v)) {
            TestConfig c = base;
            c.M = M;
            results.push_back(result_json(run_test(series, c)));
        }
    }
    json out = {{"input", v.at("input")}, {"T", series.T()}, {"results", results}};
    std::cout << out.dump(2) << '\n';
    if (!v.at("out_dir").empty()) {
        const fs::path dir = v.at("out_dir");
        write_files({{dir / "result.json", out.dump(2) + "\n"},
                     {dir / "config.json", config_json(v).dump(2) + "\n"}});
    }
    return 0;
}

int cmd_simulate(const Values& v)
{
    const DgpSpec d = dgp_spec(v);
    const FunctionalSeries x = simulate(d);
    const std::string body = render([&](std::ostream& o) { write_series_csv(x, o); });
    if (v.at("output").empty()) {
        std::cout << body;
        return 0;
    }
    fs::path out = v.at("output");
    write_files({{out, body}, {fs::path(out.string() + ".config.json"), config_json(v).dump(2) + "\n"}});
    return 0;
}

int cmd_mc(const Values& v)
{
    const ExperimentSpec e = experiment_spec(v);
    const bool verbose = to_bool(v, "verbose");
    SummaryTable table;
    for (Model m : e.models)
        for (long T : e.Ts)
            for (Variant var : e.variants)
                for (int M : e.Ms) {
                    table.cells.push_back(run_cell(e, m, T, var, M));
                    if (verbose) std::cerr << "done " << table.cells.back().cell_name() << '\n';
                }

    const fs::path dir = out_dir(v);
    Files files;
    files.emplace_back(dir / "summary.csv", render([&](std::ostream& o) { write_summary_csv(table, o); }));
    json cells = json::array();
    for (const CellSummary& c : table.cells) cells.push_back(cell_json(c));
    files.emplace_back(dir / "summary.json", json{{"cells", cells}}.dump(2) + "\n");
    files.emplace_back(dir / "config.json", config_json(v).dump(2) + "\n");
    if (to_bool(v, "density")) {
        for (const CellSummary& c : table.cells) {
            const auto rows =
                empirical_density(c.Q, 2 * c.M, static_cast<int>(to_long(v, "bins")), to_num(v, "trim"));
            files.emplace_back(dir / ("density_" + c.cell_name() + ".csv"),
                               render([&](std::ostream& o) { write_density_csv(rows, o); }));
        }
    }
    write_files(files);
    std::cout << json{{"out_dir", dir.string()}, {"cells", cells}}.dump(2) << '\n';
    return 0;
}

int cmd_contour(Values v)
{
    const int G = static_cast<int>(to_long(v, "G"));
    const Variant variant = parse_variant(v.at("variant"));
    ContourGrid grid;
    std::string name;
    if (!v.at("input").empty()) {
        std::vector<FunctionalSeries> series;
        BasisDescriptor basis{static_cast<int>(to_long(v, "n_basis"))};
        for (const std::string& p : split_list(v.at("input")))
            series.push_back(series_from_csv(read_csv(p), basis, to_bool(v, "demean")));
        grid = contour_from_series(series, variant, test_config(v), G,
                                   static_cast<int>(to_long(v, "threads")));
        name = std::string("input_") + to_string(variant);
    } else {
        v["models"] = v.at("model");
        v["Ts"] = v.at("T");
        v["variants"] = v.at("variant");
        v["M"] = "1";
        const ExperimentSpec e = experiment_spec(v);
        const Model m = parse_model(v.at("model"));
        const long T = to_long(v, "T");
        grid = contour_gamma(e, m, T, variant, G);
        name = to_string(m) + "_T" + std::to_string(T) + "_" + to_string(variant);
    }
    const fs::path dir = out_dir(v);
    write_files({{dir / ("contour_" + name + ".csv"),
                  render([&](std::ostream& o) { write_contour_csv(grid, o); })},
                 {dir / "config.json", config_json(v).dump(2) + "\n"}});
    std::cout << json{{"out_dir", dir.string()}, {"max", grid.values.maxCoeff()}}.dump(2) << '\n';
    return 0;
}

// Precedence: flags > config file > preset > environment > built-in defaults.
Values resolve(const std::map<std::string, std::string>& flags, const std::string& config_path)
{
    Values v;
    for (const Key& k : keys()) v[k.name] = k.def;
    if (const char* e = std::getenv("FDSTAT_OUT_DIR")) v["out_dir"] = e;
    if (const char* e = std::getenv("FDSTAT_THREADS")) v["threads"] = e;
    Values cfg;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        require(f.good(), ErrorKind::input, "cannot open config " + config_path);
        json j;
        try {
            j = json::parse(f);
        } catch (const json::exception& ex) {
            fail(ErrorKind::input, "config " + config_path + ": " + ex.what());
        }
        require(j.is_object(), ErrorKind::input, "config must be a JSON object");
        for (const auto& [k, val] : j.items()) {
            require(v.count(k) == 1, ErrorKind::configuration, "unknown config key '" + k + "'");
            cfg[k] = val.is_string() ? val.get<std::string>() : val.dump();
        }
    }
    // A preset only replaces defaults; config and flags still win over it.
    std::string preset = cfg.count("preset") ? cfg.at("preset") : "";
    if (flags.count("preset")) preset = flags.at("preset");
    if (!preset.empty()) apply_preset(v, preset);
    for (const auto& [k, val] : cfg) v[k] = val;
    for (const auto& [k, val] : flags) v[k] = val;
    return v;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Frequency-domain stationarity test for functional time series"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string config_path;
    std::map<std::string, std::string> store;
    std::map<std::string, CLI::Option*> opts;

    std::vector<CLI::App*> subs = {
        app.add_subcommand("test", "Run the test on a CSV series and print result JSON"),
        app.add_subcommand("simulate", "Simulate one series and write coefficient CSV"),
        app.add_subcommand("mc", "Monte Carlo experiment; writes summary.csv and summary.json"),
        app.add_subcommand("contour", "Averaged lag-1 gamma surface on a G x G grid"),
    };
    // Every subcommand accepts every key so one config file drives all of them.
    std::map<std::string, std::string> values;
    for (CLI::App* s : subs) {
        s->add_option("--config", config_path, "JSON object of config keys; flags override it");
        for (const Key& k : keys()) {
            auto* o = s->add_option(flag_of(k.name), values[s->get_name() + "/" + k.name], k.help);
            o->default_str(k.def);
            opts[s->get_name() + "/" + k.name] = o;
        }
    }
    for (CLI::App* s : subs) s->add_flag("--no-demean", "same as --demean false");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    for (const Key& k : keys())
        if (opts.at(name + "/" + k.name)->count() > 0) store[k.name] = values.at(name + "/" + k.name);
    if (sub->get_option("--no-demean")->count() > 0) store["demean"] = "false";

    try {
        Values v = resolve(store, config_path);
        if (name == "test") return cmd_test(v);
        if (name == "simulate") return cmd_simulate(v);
        if (name == "mc") return cmd_mc(v);
        return cmd_contour(v);
    } catch (const Error& e) {
        std::cerr << "fdstat: " << to_string(e.kind()) << " error: " << e.what() << '\n';
        return e.is_input_error() ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "fdstat: error: " << e.what() << '\n';
        return 3;
    }
}
