#ifndef CIV_SIMULATE_HPP
#define CIV_SIMULATE_HPP

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <civ/avar.hpp>
#include <civ/criteria.hpp>
#include <civ/error.hpp>
#include <civ/estimator.hpp>
#include <civ/graph.hpp>
#include <civ/optimal.hpp>
#include <civ/sem.hpp>

namespace civ {

inline std::string tuple_label(const Admg& g, const CondInstrumentSet& t) {
    std::string out = "Z=";
    bool first = true;
    for (int v : t.z) {
        if (!first) out += ',';
        out += g.name(v);
        first = false;
    }
    out += ";W=";
    first = true;
    for (int v : t.w) {
        if (!first) out += ',';
        out += g.name(v);
        first = false;
    }
    return out;
}

struct StudyConfig {
    Admg graph;
    std::string graph_label = "graph";
    std::string x, y;
    int n_models = 1000;
    int n_datasets = 100;
    std::vector<long> sample_sizes = {20, 500};
    std::uint64_t base_seed = 1;
    // Tuples to benchmark; all enumerated valid tuples when empty. The
    // district-based optimal tuple must be among them (it is, by validity).
    std::vector<CondInstrumentSet> tuples;
    bool include_ols = true;
    int jobs = 1;
};

struct StudyRow {
    int model_id;
    ErrorFamily family;
    long n;
    std::string tuple;
    double rmse;
    double ratio_to_optimal;  // rmse(optimal) / rmse(this tuple); < 1: optimal won
    int skipped;              // replicates dropped for rank failures
};

struct StudySummary {
    std::string tuple;
    long n;
    double geo_mean_ratio;
    double frac_ratio_lt_1;
};

struct StudyResult {
    std::string graph_label;
    std::vector<StudyRow> rows;
    std::vector<StudySummary> summary;
    std::string optimal_label;

    std::string to_csv() const {
        std::string out = "graph,model_id,error_family,n,tuple,rmse,ratio_to_optimal,skipped\n";
        char buf[64];
        for (const auto& r : rows) {
            out += graph_label;
            out += ',' + std::to_string(r.model_id) + ',' + to_string(r.family) + ',' +
                   std::to_string(r.n) + ',' + r.tuple + ',';
            std::snprintf(buf, sizeof(buf), "%.12g", r.rmse);
            out += buf;
            out += ',';
            std::snprintf(buf, sizeof(buf), "%.12g", r.ratio_to_optimal);
            out += buf;
            out += ',' + std::to_string(r.skipped) + '\n';
        }
        return out;
    }
};

// Seed streams: one per model for the parameter draw, one per (model, size,
// dataset) for sampling. Role tags keep the streams disjoint.
inline std::uint64_t model_seed(std::uint64_t base, int model) {
    return derive_seed(base, 1, static_cast<std::uint64_t>(model));
}

inline std::uint64_t dataset_seed(std::uint64_t base, int model, int size_index, int dataset) {
    return derive_seed(base, 2, static_cast<std::uint64_t>(model),
                       static_cast<std::uint64_t>(size_index),
                       static_cast<std::uint64_t>(dataset));
}

// Monte Carlo benchmark of the tuple estimators against the district-based
// optimal tuple: random models, repeated sampling, per-tuple RMSE against the
// known total effect, and RMSE ratios to the optimal tuple. Deterministic for
// a fixed base seed and independent of the parallelism degree.
inline StudyResult run_study(const StudyConfig& cfg) {
    const Admg& g = cfg.graph;
    int x = g.index_of(cfg.x), y = g.index_of(cfg.y);

    std::vector<CondInstrumentSet> tuples =
        cfg.tuples.empty() ? enumerate_valid_cis(g, x, y) : cfg.tuples;
    if (tuples.empty()) throw Error(errc::precondition, "no valid tuples to benchmark");

    ReducedGraph reduced = reduce_for_estimation(g, x, y);
    if (reduced.zero_effect)
        throw Error(errc::precondition, "outcome does not descend from the treatment");
    OptimalResult opt = optimal_cis(reduced.graph, reduced.graph.index_of(cfg.x),
                                    reduced.graph.index_of(cfg.y));
    if (!opt.is_valid)
        throw Error(errc::precondition, "district construction yields no valid tuple here");
    CondInstrumentSet opt_tuple{g.node_set(reduced.graph.names_of(opt.z_opt)),
                                g.node_set(reduced.graph.names_of(opt.w_opt))};
    std::size_t opt_index = tuples.size();
    for (std::size_t i = 0; i < tuples.size(); ++i)
        if (tuples[i] == opt_tuple) opt_index = i;
    if (opt_index == tuples.size())
        throw Error(errc::precondition, "optimal tuple is missing from the benchmark list");

    struct Arm {
        std::string label;
        std::vector<std::string> z, w;
        bool ols;
    };
    std::vector<Arm> arms;
    for (const auto& t : tuples)
        arms.push_back({tuple_label(g, t), g.names_of(t.z), g.names_of(t.w), false});
    if (cfg.include_ols) arms.push_back({"OLS", {}, {}, true});

    int n_sizes = static_cast<int>(cfg.sample_sizes.size());
    int rows_per_model = n_sizes * static_cast<int>(arms.size());
    std::vector<StudyRow> rows(static_cast<std::size_t>(cfg.n_models) * rows_per_model);

    auto run_model = [&](int m) {
        CanonicalSem canon = random_sem(g, model_seed(cfg.base_seed, m));
        double tau = total_effect(marginal_linear_sem(canon), x, y);
        for (int ni = 0; ni < n_sizes; ++ni) {
            long n = cfg.sample_sizes[ni];
            std::vector<double> sq_err(arms.size(), 0.0);
            std::vector<int> used(arms.size(), 0), skipped(arms.size(), 0);
            for (int d = 0; d < cfg.n_datasets; ++d) {
                DataMatrix data = sample(canon, n, dataset_seed(cfg.base_seed, m, ni, d));
                for (std::size_t a = 0; a < arms.size(); ++a) {
                    try {
                        double est = arms[a].ols
                                         ? ols(data, cfg.x, cfg.y, {}).estimate
                                         : tsls(data, cfg.x, cfg.y, arms[a].z, arms[a].w).estimate;
                        double err = est - tau;
                        sq_err[a] += err * err;
                        ++used[a];
                    } catch (const Error&) {
                        ++skipped[a];
                    }
                }
            }
            for (std::size_t a = 0; a < arms.size(); ++a) {
                StudyRow& r = rows[static_cast<std::size_t>(m) * rows_per_model +
                                   ni * arms.size() + a];
                r.model_id = m;
                r.family = canon.family();
                r.n = n;
                r.tuple = arms[a].label;
                r.rmse = used[a] > 0 ? std::sqrt(sq_err[a] / used[a])
                                     : std::numeric_limits<double>::quiet_NaN();
                r.skipped = skipped[a];
            }
            double opt_rmse =
                rows[static_cast<std::size_t>(m) * rows_per_model + ni * arms.size() + opt_index]
                    .rmse;
            for (std::size_t a = 0; a < arms.size(); ++a) {
                StudyRow& r = rows[static_cast<std::size_t>(m) * rows_per_model +
                                   ni * arms.size() + a];
                r.ratio_to_optimal = opt_rmse / r.rmse;
            }
        }
    };

    int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (int m = 0; m < cfg.n_models; ++m) run_model(m);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                for (int m = next.fetch_add(1); m < cfg.n_models; m = next.fetch_add(1))
                    run_model(m);
            });
        for (auto& th : pool) th.join();
    }

    StudyResult result;
    result.graph_label = cfg.graph_label;
    result.optimal_label = arms[opt_index].label;
    result.rows = std::move(rows);

    for (std::size_t a = 0; a < arms.size(); ++a) {
        for (int ni = 0; ni < n_sizes; ++ni) {
            double log_sum = 0.0;
            int count = 0, below = 0;
            for (int m = 0; m < cfg.n_models; ++m) {
                const StudyRow& r = result.rows[static_cast<std::size_t>(m) * rows_per_model +
                                                ni * arms.size() + a];
                if (std::isfinite(r.ratio_to_optimal) && r.ratio_to_optimal > 0.0) {
                    log_sum += std::log(r.ratio_to_optimal);
                    ++count;
                    if (r.ratio_to_optimal < 1.0) ++below;
                }
            }
            StudySummary s;
            s.tuple = arms[a].label;
            s.n = cfg.sample_sizes[ni];
            s.geo_mean_ratio =
                count > 0 ? std::exp(log_sum / count) : std::numeric_limits<double>::quiet_NaN();
            s.frac_ratio_lt_1 = count > 0 ? static_cast<double>(below) / count
                                          : std::numeric_limits<double>::quiet_NaN();
            result.summary.push_back(std::move(s));
        }
    }
    return result;
}

}  // namespace civ

#endif  // CIV_SIMULATE_HPP
