// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eqlsr Authors

#include "eqlsr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "eqlsr/errors.hpp"
#include "eqlsr/extract.hpp"

namespace eqlsr {

namespace {
    using nlohmann::json;

    // Typed access to one JSON object; anything left unread is an unknown field.
    class FieldReader {
    public:
        FieldReader(json const& doc, std::string path)
            : doc_(doc)
            , path_(std::move(path))
        {
            if (!doc_.is_object()) { throw ConfigError(where() + ": expected an object"); }
        }

        [[nodiscard]] auto has(std::string const& key) const -> bool { return doc_.contains(key); }

        [[nodiscard]] auto child(std::string const& key) -> json const*
        {
            seen_.insert(key);
            return doc_.contains(key) ? &doc_.at(key) : nullptr;
        }

        void number(std::string const& key, double& out, bool positive = false)
        {
            if (auto const* v = child(key)) {
                if (!v->is_number()) { throw ConfigError(field(key) + ": expected a number"); }
                out = v->get<double>();
                if (!std::isfinite(out) || (positive && !(out > 0.0)) || out < 0.0) {
                    throw ConfigError(field(key) + (positive ? ": must be positive" : ": must be non-negative"));
                }
            }
        }

        void count(std::string const& key, std::size_t& out, bool positive = false)
        {
            if (auto const* v = child(key)) {
                if (!v->is_number_unsigned()) { throw ConfigError(field(key) + ": expected a non-negative integer"); }
                out = v->get<std::size_t>();
                if (positive && out == 0) { throw ConfigError(field(key) + ": must be at least 1"); }
            }
        }

        void flag(std::string const& key, bool& out)
        {
            if (auto const* v = child(key)) {
                if (!v->is_boolean()) { throw ConfigError(field(key) + ": expected true or false"); }
                out = v->get<bool>();
            }
        }

        void text(std::string const& key, std::string& out)
        {
            if (auto const* v = child(key)) {
                if (!v->is_string()) { throw ConfigError(field(key) + ": expected a string"); }
                out = v->get<std::string>();
            }
        }

        void finish() const
        {
            for (auto const& [key, value] : doc_.items()) {
                if (!seen_.contains(key)) { throw ConfigError(field(key) + ": unknown field"); }
            }
        }

        [[nodiscard]] auto field(std::string const& key) const -> std::string { return path_.empty() ? key : path_ + "." + key; }

    private:
        [[nodiscard]] auto where() const -> std::string { return path_.empty() ? "config" : path_; }

        json const& doc_;
        std::string path_;
        std::set<std::string> seen_;
    };

    auto seeds_from_json(json const& v) -> std::vector<std::uint64_t>
    {
        std::vector<std::uint64_t> seeds;
        if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_number_unsigned()) {
                    throw ConfigError("seeds[" + std::to_string(i) + "]: expected a non-negative integer");
                }
                seeds.push_back(v[i].get<std::uint64_t>());
            }
        } else if (v.is_object()) {
            FieldReader r(v, "seeds");
            std::size_t first = 1;
            std::size_t n = 1;
            r.count("first", first);
            r.count("count", n, true);
            r.finish();
            for (std::size_t i = 0; i < n; ++i) { seeds.push_back(first + i); }
        } else {
            throw ConfigError("seeds: expected a list or {\"first\", \"count\"}");
        }
        if (seeds.empty()) { throw ConfigError("seeds: at least one seed is required"); }
        std::set<std::uint64_t> const unique(seeds.begin(), seeds.end());
        if (unique.size() != seeds.size()) { throw ConfigError("seeds: duplicate seed"); }
        return seeds;
    }

    auto network_model(Network const& net) -> ModelEval
    {
        return [&net, cache = std::make_shared<ForwardCache>()](std::span<double const> x) { return forward(net, x, *cache); };
    }

    auto median_of(std::vector<RunRecord const*> const& ok, auto get) -> double
    {
        std::vector<double> v;
        v.reserve(ok.size());
        for (auto const* r : ok) { v.push_back(get(*r)); }
        return median(std::move(v));
    }
} // namespace

auto config_from_json(nlohmann::json const& doc) -> RunConfig
{
    RunConfig cfg;
    FieldReader top(doc, "");

    auto const* problem = top.child("problem");
    if (problem == nullptr) { throw ConfigError("problem: required field missing"); }
    try {
        cfg.problem = params_from_json(*problem);
    } catch (ConfigError const& e) {
        throw ConfigError(std::string("problem.") + e.what());
    }

    if (auto const* arch = top.child("architecture")) {
        if (arch->is_string()) {
            cfg.architecture = arch->get<std::string>();
            static std::set<std::string> const presets { "default", "general", "general-arctan", "informed" };
            if (!presets.contains(cfg.architecture)) {
                throw ConfigError("architecture: expected default, general, general-arctan, informed or an object");
            }
        } else {
            try {
                cfg.custom_architecture = spec_from_json(*arch);
                cfg.custom_architecture->validate();
            } catch (std::exception const& e) {
                throw ConfigError(std::string("architecture: ") + e.what());
            }
            cfg.architecture = "custom";
        }
    }

    if (auto const* v = top.child("variant")) {
        if (!v->is_string()) { throw ConfigError("variant: expected a string"); }
        cfg.trainer.variant = VariantConfig::parse(v->get<std::string>());
    }

    auto& t = cfg.trainer;
    if (auto const* s = top.child("schedule")) {
        FieldReader r(*s, "schedule");
        r.count("n_init", t.schedule.n_init);
        r.count("n_e", t.schedule.n_e);
        r.count("n_f", t.schedule.n_f);
        r.count("epochs", t.schedule.epochs);
        r.count("n_final", t.schedule.n_final);
        r.finish();
    }
    if (auto const* s = top.child("loss")) {
        FieldReader r(*s, "loss");
        r.number("r_st", t.loss.ratios.s);
        r.number("r_ct", t.loss.ratios.c);
        r.number("r_rt", t.loss.ratios.r);
        r.count("window", t.loss.window, true);
        r.number("theta_s", t.loss.singularity_threshold, true);
        r.number("l05_a", t.loss.l05_a, true);
        r.finish();
    }
    if (auto const* s = top.child("selection")) {
        FieldReader r(*s, "selection");
        r.number("theta_a", t.active_threshold, true);
        r.number("epsilon", t.epsilon);
        r.count("history", t.history_k, true);
        r.finish();
    }
    if (auto const* s = top.child("optimizer")) {
        FieldReader r(*s, "optimizer");
        r.number("lr", t.adam.lr, true);
        r.number("beta1", t.adam.beta1);
        r.number("beta2", t.adam.beta2);
        r.number("eps", t.adam.eps);
        r.flag("reset", t.reset_adam);
        r.finish();
        if (t.adam.beta1 >= 1.0) { throw ConfigError("optimizer.beta1: must be below 1"); }
        if (t.adam.beta2 >= 1.0) { throw ConfigError("optimizer.beta2: must be below 1"); }
    }
    top.number("division_guard", t.division_guard, true);
    if (auto const* s = top.child("seeds")) { cfg.seeds = seeds_from_json(*s); }
    top.count("threads", cfg.threads);
    top.finish();
    return cfg;
}

auto config_to_json(RunConfig const& cfg) -> nlohmann::json
{
    auto const& t = cfg.trainer;
    json doc;
    doc["problem"] = params_to_json(cfg.problem);
    doc["architecture"] = cfg.custom_architecture ? spec_to_json(*cfg.custom_architecture) : json(cfg.architecture);
    doc["variant"] = t.variant.code();
    doc["schedule"] = { { "n_init", t.schedule.n_init }, { "n_e", t.schedule.n_e }, { "n_f", t.schedule.n_f },
        { "epochs", t.schedule.epochs }, { "n_final", t.schedule.n_final } };
    doc["loss"] = { { "r_st", t.loss.ratios.s }, { "r_ct", t.loss.ratios.c }, { "r_rt", t.loss.ratios.r }, { "window", t.loss.window },
        { "theta_s", t.loss.singularity_threshold }, { "l05_a", t.loss.l05_a } };
    doc["selection"] = { { "theta_a", t.active_threshold }, { "epsilon", t.epsilon }, { "history", t.history_k } };
    doc["optimizer"] = { { "lr", t.adam.lr }, { "beta1", t.adam.beta1 }, { "beta2", t.adam.beta2 }, { "eps", t.adam.eps },
        { "reset", t.reset_adam } };
    doc["division_guard"] = t.division_guard;
    doc["seeds"] = cfg.seeds;
    doc["threads"] = cfg.threads;
    return doc;
}

auto load_config(std::filesystem::path const& path) -> RunConfig
{
    std::ifstream is(path);
    if (!is) { throw ConfigError("cannot open config " + path.string()); }
    json doc;
    try {
        doc = json::parse(is);
    } catch (json::parse_error const& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(doc);
}

auto resolve_architecture(RunConfig const& cfg, ProblemBundle const& bundle) -> ArchitectureSpec
{
    if (cfg.architecture == "custom") {
        if (!cfg.custom_architecture) { throw ConfigError("architecture: custom without a specification"); }
        if (cfg.custom_architecture->num_inputs() != bundle.input_names.size()) {
            throw ConfigError("architecture: input count does not match the problem");
        }
        return *cfg.custom_architecture;
    }
    if (cfg.architecture == "general") { return general_architecture(bundle.input_names); }
    if (cfg.architecture == "general-arctan") { return general_architecture(bundle.input_names, true); }
    if (cfg.architecture == "informed") { return informed_architecture(bundle.input_names); }
    return bundle.architecture;
}

namespace {
    // Errors of diverged models are infinite; JSON stores them as null.
    auto finite_or_null(double v) -> nlohmann::json { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
    auto null_or_finite(nlohmann::json const& v) -> double
    {
        return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
    }
} // namespace

auto metrics_to_json(Metrics const& m) -> nlohmann::json
{
    json doc { { "rmse_int", finite_or_null(m.rmse_int) }, { "rmse_ext", finite_or_null(m.rmse_ext) },
        { "rmse_int_ext", finite_or_null(m.rmse_int_ext) } };
    json rho = json::object();
    for (std::size_t j = 0; j < m.rho_c.size(); ++j) { rho[m.constraint_names[j]] = finite_or_null(m.rho_c[j]); }
    doc["rho_c"] = rho;
    doc["constraints"] = m.constraint_names;
    if (m.rmse_valid) { doc["rmse_valid"] = finite_or_null(*m.rmse_valid); }
    if (!m.rmse_sim.empty()) {
        doc["rmse_sim"] = nlohmann::json::array();
        for (auto v : m.rmse_sim) { doc["rmse_sim"].push_back(finite_or_null(v)); }
    }
    if (m.rmse_sum) { doc["rmse_sum"] = finite_or_null(*m.rmse_sum); }
    return doc;
}

auto metrics_from_json(nlohmann::json const& doc) -> Metrics
{
    Metrics m;
    m.rmse_int = null_or_finite(doc.at("rmse_int"));
    m.rmse_ext = null_or_finite(doc.at("rmse_ext"));
    m.rmse_int_ext = null_or_finite(doc.at("rmse_int_ext"));
    m.constraint_names = doc.at("constraints").get<std::vector<std::string>>();
    for (auto const& name : m.constraint_names) { m.rho_c.push_back(null_or_finite(doc.at("rho_c").at(name))); }
    if (doc.contains("rmse_valid")) { m.rmse_valid = null_or_finite(doc.at("rmse_valid")); }
    if (doc.contains("rmse_sim")) {
        for (auto const& v : doc.at("rmse_sim")) { m.rmse_sim.push_back(null_or_finite(v)); }
    }
    if (doc.contains("rmse_sum")) { m.rmse_sum = null_or_finite(doc.at("rmse_sum")); }
    return m;
}

auto simulation_rmse(ModelEval const& model, Sequence const& seq) -> double
{
    if (seq.rows.empty()) { return 0.0; }
    double x = seq.rows.front()[0];
    double sum = 0.0;
    std::vector<double> input;
    for (std::size_t k = 0; k < seq.rows.size(); ++k) {
        input = seq.rows[k];
        input[0] = x;
        x = model(input);
        // A diverged rollout cannot be fed back any further.
        if (!std::isfinite(x)) { return std::numeric_limits<double>::infinity(); }
        auto const e = x - seq.next_x[k];
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(seq.rows.size()));
}

auto evaluate_model(ModelEval const& model, ProblemBundle const& bundle) -> Metrics
{
    if (bundle.interp.empty()) { throw DataError("bundle has no interpolation test set"); }
    if (bundle.extrap.empty()) { throw DataError("bundle has no extrapolation test set"); }
    Metrics m;
    m.rmse_int = rmse(model, bundle.interp);
    m.rmse_ext = rmse(model, bundle.extrap);
    m.rmse_int_ext = rmse(model, bundle.interp.merged(bundle.extrap));
    for (auto const& c : bundle.constraints.constraints) {
        m.constraint_names.push_back(c.name);
        m.rho_c.push_back(violation_rmse(c, model));
    }
    if (!bundle.test_sequences.empty()) {
        m.rmse_valid = simulation_rmse(model, bundle.valid_sequence);
        double sum = 0.0;
        for (auto const& s : bundle.test_sequences) {
            m.rmse_sim.push_back(simulation_rmse(model, s));
            sum += m.rmse_sim.back();
        }
        m.rmse_sum = sum;
    }
    return m;
}

auto evaluate_snapshot(ArchitectureSpec const& spec, ModelSnapshot const& snapshot, ProblemBundle const& bundle, double division_guard)
    -> Metrics
{
    auto net = build_network(spec, 0, division_guard);
    net.set_weights(snapshot.weights);
    return evaluate_model(network_model(net), bundle);
}

auto record_to_json(RunRecord const& r) -> nlohmann::json
{
    json doc { { "seed", r.seed }, { "problem", r.problem }, { "variant", r.variant }, { "ok", r.ok } };
    if (!r.ok) {
        doc["error"] = r.error;
        return doc;
    }
    doc["expression"] = r.expression;
    doc["links"] = r.complexity.links;
    doc["units"] = r.complexity.units;
    doc["nontrivial"] = r.nontrivial;
    doc["metrics"] = metrics_to_json(r.metrics);
    doc["snapshot"] = snapshot_to_json(r.snapshot);
    return doc;
}

auto record_from_json(nlohmann::json const& doc) -> RunRecord
{
    RunRecord r;
    try {
        r.seed = doc.at("seed").get<std::uint64_t>();
        r.problem = doc.at("problem").get<std::string>();
        r.variant = doc.at("variant").get<std::string>();
        r.ok = doc.at("ok").get<bool>();
        if (!r.ok) {
            r.error = doc.value("error", std::string {});
            return r;
        }
        r.expression = doc.at("expression").get<std::string>();
        r.complexity = { doc.at("links").get<std::size_t>(), doc.at("units").get<std::size_t>() };
        r.nontrivial = doc.at("nontrivial").get<bool>();
        r.metrics = metrics_from_json(doc.at("metrics"));
        r.snapshot = snapshot_from_json(doc.at("snapshot"));
    } catch (json::exception const& e) {
        throw DataError(std::string("malformed run record: ") + e.what());
    }
    return r;
}

auto read_records(std::istream& is) -> std::vector<RunRecord>
{
    std::vector<RunRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) { continue; }
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (json::parse_error const& e) {
            throw DataError("record line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

auto run_single(RunConfig const& cfg, ProblemBundle const& bundle, std::uint64_t seed, std::ostream* log) -> RunRecord
{
    RunRecord r;
    r.seed = seed;
    r.problem = cfg.problem.name;
    r.variant = cfg.trainer.variant.code();
    auto const t0 = std::chrono::steady_clock::now();
    try {
        auto const spec = resolve_architecture(cfg, bundle);
        TrainingData const data { &bundle.train, &bundle.valid, &bundle.extrap_valid, &bundle.constraints };
        auto const result = run(spec, data, cfg.trainer, seed, log);
        r.snapshot = result.model_star;
        r.complexity = r.snapshot.complexity;
        r.nontrivial = is_nontrivial(r.complexity);
        auto net = build_network(spec, 0, cfg.trainer.division_guard);
        net.set_weights(r.snapshot.weights);
        r.expression = render(*simplify(to_expression(net, cfg.trainer.active_threshold)));
        r.metrics = evaluate_model(network_model(net), bundle);
    } catch (std::exception const& e) {
        r.ok = false;
        r.error = e.what();
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

auto median(std::vector<double> values) -> double
{
    if (values.empty()) { throw DataError("median of an empty set"); }
    std::ranges::sort(values);
    auto const n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

auto summarize(std::vector<RunRecord> const& records) -> Summary
{
    Summary s;
    s.runs = records.size();
    std::vector<RunRecord const*> ok;
    for (auto const& r : records) {
        if (s.problem.empty()) {
            s.problem = r.problem;
            s.variant = r.variant;
        }
        if (r.ok) {
            ok.push_back(&r);
        } else {
            ++s.failed;
        }
    }
    if (ok.empty()) { return s; }
    for (auto const* r : ok) {
        if (is_nontrivial(r->complexity)) { ++s.n_nt; }
    }
    s.links = median_of(ok, [](RunRecord const& r) { return static_cast<double>(r.complexity.links); });
    s.units = median_of(ok, [](RunRecord const& r) { return static_cast<double>(r.complexity.units); });
    s.rmse_int = median_of(ok, [](RunRecord const& r) { return r.metrics.rmse_int; });
    s.rmse_ext = median_of(ok, [](RunRecord const& r) { return r.metrics.rmse_ext; });
    s.rmse_int_ext = median_of(ok, [](RunRecord const& r) { return r.metrics.rmse_int_ext; });
    if (ok.front()->metrics.rmse_sum) {
        s.rmse_valid = median_of(ok, [](RunRecord const& r) { return r.metrics.rmse_valid.value_or(0.0); });
        for (std::size_t i = 0; i < ok.front()->metrics.rmse_sim.size(); ++i) {
            s.rmse_sim.push_back(median_of(ok, [i](RunRecord const& r) { return r.metrics.rmse_sim.at(i); }));
        }
        s.rmse_sum = median_of(ok, [](RunRecord const& r) { return r.metrics.rmse_sum.value_or(0.0); });
    }
    return s;
}

auto summarize_groups(std::vector<RunRecord> const& records) -> std::vector<Summary>
{
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, std::vector<RunRecord>> groups;
    for (auto const& r : records) {
        auto key = std::make_pair(r.problem, r.variant);
        if (!groups.contains(key)) { order.push_back(key); }
        groups[key].push_back(r);
    }
    std::vector<Summary> out;
    for (auto const& key : order) { out.push_back(summarize(groups[key])); }
    return out;
}

namespace {
    auto fmt(double v) -> std::string
    {
        std::ostringstream os;
        os.precision(3);
        os << v;
        return os.str();
    }
} // namespace

void write_report_markdown(std::ostream& os, std::vector<Summary> const& rows)
{
    bool const closed_loop = std::ranges::any_of(rows, [](Summary const& s) { return s.rmse_sum.has_value(); });
    std::size_t const n_sim = closed_loop ? std::ranges::max(rows, {}, [](Summary const& s) { return s.rmse_sim.size(); }).rmse_sim.size() : 0;
    os << "| problem | method | complexity | RMSE_int | RMSE_ext | RMSE_int+ext |";
    if (closed_loop) {
        os << " RMSE_valid |";
        for (std::size_t i = 0; i < n_sim; ++i) { os << " RMSE_" << i + 1 << " |"; }
        os << " RMSE_sum |";
    }
    os << " N_nt | failed |\n|---|---|---|---|---|---|";
    if (closed_loop) {
        for (std::size_t i = 0; i < n_sim + 2; ++i) { os << "---|"; }
    }
    os << "---|---|\n";
    for (auto const& s : rows) {
        os << "| " << s.problem << " | " << s.variant << " | ";
        if (s.runs == s.failed) {
            os << "- | - | - | - |";
        } else {
            os << fmt(s.links) << " / " << fmt(s.units) << " | " << fmt(s.rmse_int) << " | " << fmt(s.rmse_ext) << " | "
               << fmt(s.rmse_int_ext) << " |";
        }
        if (closed_loop) {
            os << ' ' << (s.rmse_valid ? fmt(*s.rmse_valid) : "-") << " |";
            for (std::size_t i = 0; i < n_sim; ++i) { os << ' ' << (i < s.rmse_sim.size() ? fmt(s.rmse_sim[i]) : "-") << " |"; }
            os << ' ' << (s.rmse_sum ? fmt(*s.rmse_sum) : "-") << " |";
        }
        os << ' ' << s.n_nt << '/' << s.runs - s.failed << " | " << s.failed << " |\n";
    }
}

void write_report_csv(std::ostream& os, std::vector<Summary> const& rows)
{
    os << "problem,variant,runs,failed,n_nt,links,units,rmse_int,rmse_ext,rmse_int_ext,rmse_valid,rmse_sum\n";
    for (auto const& s : rows) {
        os << s.problem << ',' << s.variant << ',' << s.runs << ',' << s.failed << ',' << s.n_nt << ',' << format_double(s.links) << ','
           << format_double(s.units) << ',' << format_double(s.rmse_int) << ',' << format_double(s.rmse_ext) << ','
           << format_double(s.rmse_int_ext) << ',' << (s.rmse_valid ? format_double(*s.rmse_valid) : "") << ','
           << (s.rmse_sum ? format_double(*s.rmse_sum) : "") << '\n';
    }
}

void write_trace_csv(std::istream& log, std::ostream& os)
{
    os << "iter,phase,epoch,l_t,l_s,l_c,l_r,rho_r,alpha,beta,gamma,links,units,valid,best_links,best_units\n";
    std::string line;
    std::size_t n = 0;
    while (std::getline(log, line)) {
        ++n;
        if (line.empty()) { continue; }
        json rec;
        try {
            rec = json::parse(line);
            auto const& c = rec.at("cand");
            auto const& best = rec.at("model_star");
            os << rec.at("iter").get<std::size_t>() << ',' << rec.at("phase").get<std::string>() << ',' << rec.at("epoch").get<long long>()
               << ',' << format_double(rec.at("l_t").get<double>()) << ',' << format_double(rec.at("l_s").get<double>()) << ','
               << format_double(rec.at("l_c").get<double>()) << ',' << format_double(rec.at("l_r").get<double>()) << ','
               << format_double(rec.at("rho_r").get<double>()) << ',' << format_double(rec.at("alpha").get<double>()) << ','
               << format_double(rec.at("beta").get<double>()) << ',' << format_double(rec.at("gamma").get<double>()) << ','
               << c.at("links").get<std::size_t>() << ',' << c.at("units").get<std::size_t>() << ','
               << format_double(c.at("valid").get<double>()) << ',' << best.at("links").get<std::size_t>() << ','
               << best.at("units").get<std::size_t>() << '\n';
        } catch (json::exception const& e) {
            throw DataError("log line " + std::to_string(n) + ": " + e.what());
        }
    }
}

auto campaign(RunConfig const& cfg, std::optional<std::filesystem::path> const& out) -> CampaignResult
{
    if (cfg.seeds.empty()) { throw ConfigError("seeds: at least one seed is required"); }
    auto const bundle = generate_problem(cfg.problem);
    if (out) {
        std::filesystem::create_directories(*out / "logs");
        std::filesystem::create_directories(*out / "models");
        write_bundle(bundle, *out / "bundle");
        std::ofstream(*out / "config.json", std::ios::binary) << config_to_json(cfg).dump(2) << '\n';
    }

    CampaignResult result;
    result.records.resize(cfg.seeds.size());
    std::atomic<std::size_t> next { 0 };
    auto worker = [&] {
        for (auto i = next++; i < cfg.seeds.size(); i = next++) {
            auto const seed = cfg.seeds[i];
            std::ofstream log;
            if (out) { log.open(*out / "logs" / ("seed-" + std::to_string(seed) + ".jsonl"), std::ios::binary); }
            result.records[i] = run_single(cfg, bundle, seed, out ? &log : nullptr);
        }
    };
    auto n_threads = cfg.threads == 0 ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : cfg.threads;
    n_threads = std::min(n_threads, cfg.seeds.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) { pool.emplace_back(worker); }
    }

    result.summary = summarize(result.records);
    if (out) {
        auto const spec = resolve_architecture(cfg, bundle);
        std::ofstream records(*out / "records.jsonl", std::ios::binary);
        std::ofstream timing(*out / "timing.csv", std::ios::binary);
        timing << "seed,wall_time_s\n";
        for (auto const& r : result.records) {
            records << record_to_json(r).dump() << '\n';
            timing << r.seed << ',' << r.wall_time << '\n';
            if (r.ok) {
                json model { { "problem", params_to_json(cfg.problem) }, { "architecture", spec_to_json(spec) },
                    { "division_guard", cfg.trainer.division_guard }, { "snapshot", snapshot_to_json(r.snapshot) } };
                std::ofstream(*out / "models" / ("seed-" + std::to_string(r.seed) + ".json"), std::ios::binary) << model.dump(1) << '\n';
            }
        }
        std::ofstream md(*out / "summary.md", std::ios::binary);
        write_report_markdown(md, { result.summary });
        std::ofstream csv(*out / "summary.csv", std::ios::binary);
        write_report_csv(csv, { result.summary });
    }
    if (result.summary.failed == result.summary.runs) {
        throw DataError("every run failed; first error: " + result.records.front().error);
    }
    return result;
}

} // namespace eqlsr
