#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>

#include "tracekin/fpe.hpp"
#include "tracekin/parallel.hpp"
#include "tracekin/random.hpp"
#include "tracekin/scattering.hpp"
#include "tracekin/series.hpp"
#include "tracekin/validation/acceptance.hpp"
#include "tracekin/validation/oracle.hpp"
#include "tracekin/validation/report.hpp"

namespace {

using namespace tracekin;
using namespace tracekin::validation;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> order;
    std::optional<long> samples;
    std::optional<double> time;
    std::optional<unsigned> workers;
    int points = 5;
    int envCount = 0;
};

void addCommon(CLI::App& cmd, CommonOptions& o) {
    cmd.add_option("--config", o.config, "YAML run configuration (defaults when omitted)")->check(CLI::ExistingFile);
    cmd.add_option("--seed", o.seed, "master seed");
    cmd.add_option("--out", o.out, "output directory (stdout when omitted)");
    cmd.add_option("--order", o.order, "truncation order N");
    cmd.add_option("--samples", o.samples, "Monte Carlo samples per order");
    cmd.add_option("--time", o.time, "evaluation time t");
    cmd.add_option("--workers", o.workers, "worker threads (0 = hardware)");
}

RunConfig resolve(const CommonOptions& o) {
    RunConfig c = o.config.empty() ? RunConfig{} : loadConfig(o.config);
    if (o.seed) c.truncation.seed = *o.seed;
    if (o.order) c.truncation.maxOrder = *o.order;
    if (o.samples) c.truncation.samplesPerOrder = *o.samples;
    if (o.time) c.time = *o.time;
    if (o.workers) c.workers = *o.workers;
    c.validate();
    setWorkerCount(c.workers);
    return c;
}

void emit(const CommonOptions& o, const std::string& name, const Table& table) {
    if (o.out.empty()) {
        std::fputs(toCsv(table).c_str(), stdout);
        return;
    }
    std::filesystem::create_directories(o.out);
    writeText(std::filesystem::path(o.out) / (name + ".csv"), toCsv(table));
}

/// Evaluation points: the trace drawn from the free-streamed density at time t,
/// environment particles in a shell just outside contact with it.
std::vector<SystemState> evaluationPoints(const RunConfig& c, const CommonOptions& o) {
    const auto init = c.initialData();
    auto rng = makeRng(c.truncation.seed, {0x636c69u});
    std::vector<SystemState> points;
    while (static_cast<int>(points.size()) < o.points) {
        SystemState s;
        s.trace = init.trace.sampleFreeStreamed(rng, c.time, c.params.massTrace);
        for (int i = 0; i < o.envCount; ++i) {
            const double r = c.params.sigma * (1.0 + 3.0 * uniform01(rng));
            s.env.push_back({s.trace.q + uniformOnSphere(rng) * r, init.env.sampleMomentum(rng)});
        }
        if (isAllowedConfiguration(s, c.params)) points.push_back(std::move(s));
    }
    return points;
}

std::vector<std::string> pointColumns(const SystemState& s) {
    std::vector<std::string> row;
    auto add = [&row](const PhasePoint& x) {
        for (double v : {x.q.x, x.q.y, x.q.z, x.p.x, x.p.y, x.p.z}) row.push_back(formatNumber(v));
    };
    add(s.trace);
    for (const auto& e : s.env) add(e);
    return row;
}

std::vector<std::string> pointHeader(int envCount) {
    std::vector<std::string> h{"point"};
    for (int i = 0; i <= envCount; ++i)
        for (const char* k : {"qx", "qy", "qz", "px", "py", "pz"}) h.push_back(fmt::format("{}{}", k, i));
    return h;
}

Table perPointTable(const RunConfig& c, const CommonOptions& o,
                    const std::function<MarginalEstimate(const SystemState&)>& eval) {
    Table t;
    t.header = pointHeader(o.envCount);
    for (int n = -1; n <= c.truncation.maxOrder; ++n) {
        t.header.push_back(fmt::format("term{}", n < 0 ? std::string("Streaming") : std::to_string(n)));
        t.header.push_back(fmt::format("term{}StdError", n < 0 ? std::string("Streaming") : std::to_string(n)));
    }
    t.header.insert(t.header.end(), {"value", "stdError", "degenerateDiscards"});
    const auto points = evaluationPoints(c, o);
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto est = eval(points[k]);
        std::vector<std::string> row{std::to_string(k)};
        const auto cols = pointColumns(points[k]);
        row.insert(row.end(), cols.begin(), cols.end());
        for (int n = -1; n <= c.truncation.maxOrder; ++n) {
            std::string v, e;
            for (const auto& term : est.perOrderTerms)
                if (term.order == n) {
                    v = formatNumber(term.value);
                    e = formatNumber(term.stdError);
                }
            row.push_back(v);
            row.push_back(e);
        }
        row.insert(row.end(),
                   {formatNumber(est.value), formatNumber(est.stdError), std::to_string(est.degenerateDiscards)});
        t.rows.push_back(std::move(row));
    }
    return t;
}

int runValidate(const CommonOptions& o, const std::vector<int>& only, const std::string& command) {
    const auto c = resolve(o);
    const auto report = runAcceptanceSuite(c, command, only, [](const CriterionResult& r) {
        fmt::print("[{}] {:>2} {}: {} [{:.1f}s / {:.0f}s]\n", r.acceptable() ? "PASS" : "FAIL", r.id, r.name,
                   r.summary, r.seconds, r.budgetSeconds);
        std::fflush(stdout);
    });
    if (!o.out.empty()) writeReport(report, o.out);
    for (const auto& r : report.criteria)
        if (!r.acceptable()) fmt::print(stderr, "failed criterion {}: {}\n", r.id, r.name);
    return report.allPassed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace hard sphere kinetics: series, collision integrals, functionals and oracle checks."};
    app.require_subcommand(1);
    CommonOptions o;

    auto* series = app.add_subcommand("series", "truncated series for the (1+s)-particle marginal at sampled points");
    auto* rhs = app.add_subcommand("fpe-rhs", "streaming term plus collision integral at sampled points");
    auto* functional = app.add_subcommand("functional", "marginal functional of the current trace marginal");
    auto* duhamel = app.add_subcommand("duhamel", "first-order Duhamel term against the N = 0 collision term");
    auto* oracle = app.add_subcommand("oracle", "molecular dynamics histogram against binned series integrals");
    auto* validate = app.add_subcommand("validate", "full acceptance suite");
    auto* identities = app.add_subcommand("identities", "transform, flow, cumulant and recurrence identities");
    for (auto* cmd : {series, rhs, functional, duhamel, oracle, validate, identities}) addCommon(*cmd, o);
    for (auto* cmd : {series, rhs, functional, duhamel}) cmd->add_option("--points", o.points, "number of points");
    for (auto* cmd : {series, functional})
        cmd->add_option("--env", o.envCount, "environment particles s in the marginal")->check(CLI::Range(0, 4));
    std::vector<int> only;
    validate->add_option("--only", only, "criterion ids to run");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*series) {
            const auto c = resolve(o);
            const auto init = c.initialData();
            emit(o, "series", perPointTable(c, o, [&](const SystemState& s) {
                     return evalMarginalSeries(o.envCount, c.time, s, init, c.truncation, c.params);
                 }));
        } else if (*rhs) {
            const auto c = resolve(o);
            const auto init = c.initialData();
            const SeriesTraceFunction traceF(c.time, init, c.truncation.maxOrder, c.params);
            emit(o, "fpe_rhs", perPointTable(c, o, [&](const SystemState& s) {
                     return fpeRightHandSide(c.time, s.trace, init, traceF, c.truncation, c.params);
                 }));
        } else if (*functional) {
            const auto c = resolve(o);
            const auto init = c.initialData();
            const SeriesTraceFunction traceF(c.time, init, c.truncation.maxOrder, c.params);
            emit(o, "functional", perPointTable(c, o, [&](const SystemState& s) {
                     return evalFunctional(o.envCount, c.time, s, init, traceF, c.truncation, c.params);
                 }));
        } else if (*duhamel) {
            const auto c = resolve(o);
            const auto init = c.initialData();
            const auto traceF = freeStreamedTraceFunction(init, c.time, c.params);
            Table t{pointHeader(0), {}};
            t.header.insert(t.header.end(), {"duhamel", "duhamelStdError", "boundary", "boundaryStdError",
                                             "collision", "collisionStdError", "zScore"});
            const auto points = evaluationPoints(c, o);
            for (std::size_t k = 0; k < points.size(); ++k) {
                const auto cmp = compareDuhamel(c.time, points[k].trace, init, *traceF, c.truncation, c.params);
                std::vector<std::string> row{std::to_string(k)};
                const auto cols = pointColumns(points[k]);
                row.insert(row.end(), cols.begin(), cols.end());
                for (double v : {cmp.duhamel.value, cmp.duhamel.stdError, cmp.boundary.value, cmp.boundary.stdError,
                                 cmp.collision.value, cmp.collision.stdError, cmp.zScore()})
                    row.push_back(formatNumber(v));
                t.rows.push_back(std::move(row));
            }
            emit(o, "duhamel", t);
        } else if (*oracle) {
            const auto c = resolve(o);
            emit(o, "oracle", runCriterion(10, c).table);
        } else if (*validate) {
            return runValidate(o, only, "validate");
        } else if (*identities) {
            return runValidate(o, {1, 2, 3, 4}, "identities");
        }
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
