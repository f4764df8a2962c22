#include "flexsum/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "flexsum/parallel.hpp"

namespace flexsum
{

const char* version_string() { return FLEXSUM_VERSION; }

namespace io
{

namespace
{

template <class T>
T field(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
    try
    {
        return j.at(key).get<T>();
    }
    catch (const json::exception& e)
    {
        throw std::invalid_argument(std::string("field '") + key + "': " + e.what());
    }
}

json range_json(Range r) { return json::array({r.lo, r.hi}); }

Range range_from(const json& j, const char* key)
{
    const auto v = field<std::vector<double>>(j, key);
    if (v.size() != 2) throw std::invalid_argument(std::string("range '") + key + "' must have two entries");
    return {v[0], v[1]};
}

std::string fmt_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

json to_json(const TclParams& p)
{
    return {{"a", p.a},         {"b", p.b},         {"theta_a", p.theta_a}, {"theta_r", p.theta_r},
            {"delta", p.delta}, {"p_max", p.p_max}, {"theta_0", p.theta_0}};
}

TclParams params_from_json(const json& j)
{
    TclParams p;
    p.a = field<double>(j, "a");
    p.b = field<double>(j, "b");
    p.theta_a = field<double>(j, "theta_a");
    p.theta_r = field<double>(j, "theta_r");
    p.delta = field<double>(j, "delta");
    p.p_max = field<double>(j, "p_max");
    p.theta_0 = field<double>(j, "theta_0");
    p.validate();
    return p;
}

json to_json(const InnerApprox& apx)
{
    return {{"device_id", apx.device_id}, {"a", apx.a},         {"u_min", apx.u_min},
            {"u_max", apx.u_max},         {"y_lb", apx.y_lb},   {"y_ub", apx.y_ub}};
}

InnerApprox approx_from_json(const json& j)
{
    InnerApprox apx;
    apx.device_id = field<int>(j, "device_id");
    apx.a = field<double>(j, "a");
    apx.u_min = field<double>(j, "u_min");
    apx.u_max = field<double>(j, "u_max");
    apx.y_lb = field<Vec>(j, "y_lb");
    apx.y_ub = field<Vec>(j, "y_ub");
    if (apx.y_lb.size() != apx.y_ub.size() || apx.y_lb.empty())
        throw std::invalid_argument("approximation bounds must be nonempty and of equal length");
    return apx;
}

json to_json(const SamplerConfig& cfg)
{
    return {{"a", range_json(cfg.a)},
            {"b", range_json(cfg.b)},
            {"theta_r", range_json(cfg.theta_r)},
            {"delta", range_json(cfg.delta)},
            {"p_max", range_json(cfg.p_max)},
            {"theta_a", cfg.theta_a},
            {"max_resamples", cfg.max_resamples}};
}

SamplerConfig sampler_from_json(const json& j)
{
    SamplerConfig cfg;
    cfg.a = range_from(j, "a");
    cfg.b = range_from(j, "b");
    cfg.theta_r = range_from(j, "theta_r");
    cfg.delta = range_from(j, "delta");
    cfg.p_max = range_from(j, "p_max");
    cfg.theta_a = field<double>(j, "theta_a");
    cfg.max_resamples = field<int>(j, "max_resamples");
    cfg.validate();
    return cfg;
}

json to_json(const Homothet& h) { return {{"device_id", h.device_id}, {"s", h.scale}, {"t", h.translation}}; }

json metadata(std::uint64_t seed, const json& config)
{
    return {{"version", version_string()}, {"seed", seed}, {"config", config}};
}

json to_json(const Population& pop)
{
    json j = metadata(pop.seed, to_json(pop.config));
    j["horizon"] = pop.horizon;
    json devices = json::array();
    for (const auto& m : pop.members)
    {
        json d = {{"device_id", m.id}, {"approx", to_json(m.approx)}};
        if (m.params) d["params"] = to_json(*m.params);
        devices.push_back(std::move(d));
    }
    j["devices"] = std::move(devices);
    return j;
}

Population population_from_json(const json& j, unsigned jobs)
{
    if (!j.is_object()) throw std::invalid_argument("population file must hold a JSON object");
    Population pop;
    pop.horizon = field<std::size_t>(j, "horizon");
    check_horizon(pop.horizon);
    pop.seed = j.contains("seed") ? field<std::uint64_t>(j, "seed") : 0;
    if (j.contains("config")) pop.config = sampler_from_json(j.at("config"));
    const auto& devices = j.contains("devices") ? j.at("devices") : json::array();
    if (!devices.is_array() || devices.empty()) throw std::invalid_argument("population has no devices");

    pop.members.resize(devices.size());
    for (std::size_t i = 0; i < devices.size(); ++i)
    {
        const json& d = devices[i];
        Member& m = pop.members[i];
        m.id = field<int>(d, "device_id");
        if (!d.contains("params")) throw std::invalid_argument("device " + std::to_string(m.id) + " has no params");
        m.params = params_from_json(d.at("params"));
        m.device = transform(*m.params, pop.horizon);
        if (d.contains("approx"))
        {
            m.approx = approx_from_json(d.at("approx"));
            if (m.approx.horizon() != pop.horizon)
                throw std::invalid_argument("device " + std::to_string(m.id) + ": approximation horizon mismatch");
        }
    }
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < devices.size(); ++i)
        if (!devices[i].contains("approx")) missing.push_back(i);
    parallel_for(missing.size(), jobs, [&](std::size_t k) {
        Member& m = pop.members[missing[k]];
        m.approx = compute_bounds(m.device, m.id);
    });
    return pop;
}

json to_json(const TrackingResult& r)
{
    return {{"method", r.method},         {"objective", r.objective},   {"rmse", r.rmse},
            {"gap", r.gap},               {"iterations", r.iterations}, {"converged", r.converged},
            {"gap_history", r.gap_history}, {"target", r.target},       {"aggregate", r.aggregate},
            {"profiles", r.profiles}};
}

json to_json(const SuiteReport& r)
{
    return {{"suite", r.name},         {"checks", r.checks},     {"failures", r.failures},
            {"skipped", r.skipped},    {"passed", r.passed()},   {"messages", r.messages}};
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

json read_json(const std::filesystem::path& path)
{
    try
    {
        return json::parse(read_text(path));
    }
    catch (const json::parse_error& e)
    {
        throw std::invalid_argument("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

namespace
{

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path)
{
    std::istringstream in(read_text(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line))
    {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

double parse_number(const std::string& s, const std::filesystem::path& path)
{
    std::size_t used = 0;
    double v = 0.0;
    try
    {
        v = std::stod(s, &used);
    }
    catch (const std::exception&)
    {
        used = 0;
    }
    if (used == 0 || !std::isfinite(v)) throw std::invalid_argument("'" + path.string() + "': bad number '" + s + "'");
    return v;
}

bool is_header(const std::vector<std::string>& row)
{
    std::size_t used = 0;
    try
    {
        (void)std::stod(row.front(), &used);
    }
    catch (const std::exception&)
    {
        return true;
    }
    return used == 0;
}

}  // namespace

Vec read_signal_csv(const std::filesystem::path& path)
{
    auto rows = read_csv_rows(path);
    if (!rows.empty() && is_header(rows.front())) rows.erase(rows.begin());
    if (rows.empty()) throw std::invalid_argument("'" + path.string() + "' holds no signal values");
    Vec g;
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        if (rows[k].size() != 2) throw std::invalid_argument("'" + path.string() + "': expected columns t,g_kW");
        if (parse_number(rows[k][0], path) != static_cast<double>(k + 1))
            throw std::invalid_argument("'" + path.string() + "': t must run 1..T");
        g.push_back(parse_number(rows[k][1], path));
    }
    return g;
}

std::string signal_csv(const Vec& g)
{
    std::ostringstream os;
    os << "t,g_kW\n";
    for (std::size_t t = 0; t < g.size(); ++t) os << t + 1 << ',' << fmt_double(g[t]) << '\n';
    return os.str();
}

Vec read_cost_csv(const std::filesystem::path& path)
{
    auto rows = read_csv_rows(path);
    if (!rows.empty() && is_header(rows.front())) rows.erase(rows.begin());
    if (rows.empty()) throw std::invalid_argument("'" + path.string() + "' holds no cost values");
    Vec c;
    for (const auto& r : rows) c.push_back(parse_number(r.back(), path));
    return c;
}

std::string records_csv(const std::vector<ExperimentRecord>& records)
{
    std::ostringstream os;
    os << "experiment,seed,trial,n,horizon,method,j_approx,j_exact,error,wall_ms\n";
    for (const auto& r : records)
        os << r.experiment << ',' << r.seed << ',' << r.trial << ',' << r.n << ',' << r.horizon << ',' << r.method
           << ',' << fmt_double(r.j_approx) << ',' << fmt_double(r.j_exact) << ',' << fmt_double(r.error) << ','
           << std::fixed << std::setprecision(3) << r.wall_ms << std::defaultfloat << '\n';
    return os.str();
}

std::string summary_csv(const std::vector<HorizonSummary>& rows)
{
    std::ostringstream os;
    os << "horizon,trials,mean_error_gpoly,mean_error_homothet\n";
    for (const auto& r : rows)
        os << r.horizon << ',' << r.trials << ',' << fmt_double(r.mean_gpoly) << ',' << fmt_double(r.mean_homothet)
           << '\n';
    return os.str();
}

std::string tracking_csv(const TrackingComparison& cmp)
{
    std::ostringstream os;
    os << "t,target,gpoly,homothet";
    for (std::size_t i = 0; i < cmp.gpoly.profiles.size(); ++i) os << ",gpoly_u" << i;
    for (std::size_t i = 0; i < cmp.homothet.profiles.size(); ++i) os << ",homothet_u" << i;
    os << '\n';
    for (std::size_t t = 0; t < cmp.gpoly.target.size(); ++t)
    {
        os << t + 1 << ',' << fmt_double(cmp.gpoly.target[t]) << ',' << fmt_double(cmp.gpoly.aggregate[t]) << ','
           << fmt_double(cmp.homothet.aggregate[t]);
        for (const auto& u : cmp.gpoly.profiles) os << ',' << fmt_double(u[t]);
        for (const auto& u : cmp.homothet.profiles) os << ',' << fmt_double(u[t]);
        os << '\n';
    }
    return os.str();
}

}  // namespace io
}  // namespace flexsum
