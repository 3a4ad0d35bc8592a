// civ: command-line front end for conditional instrumental set selection.
// Exit status 0 on success, 1 on usage errors, 2 on domain errors (reported
// as "error: <code>: <message>" on stderr).

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <civ/avar.hpp>
#include <civ/criteria.hpp>
#include <civ/error.hpp>
#include <civ/estimator.hpp>
#include <civ/graph.hpp>
#include <civ/graph_io.hpp>
#include <civ/greedy.hpp>
#include <civ/io.hpp>
#include <civ/msep.hpp>
#include <civ/optimal.hpp>
#include <civ/sem.hpp>
#include <civ/simulate.hpp>

namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> split_names(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// "Z=A,B;W=C" with an empty segment meaning the empty set.
void parse_tuple_spec(const std::string& spec, std::vector<std::string>& z,
                      std::vector<std::string>& w) {
    z.clear();
    w.clear();
    std::istringstream in(spec);
    std::string part;
    while (std::getline(in, part, ';')) {
        if (part.rfind("Z=", 0) == 0)
            z = split_names(part.substr(2));
        else if (part.rfind("W=", 0) == 0)
            w = split_names(part.substr(2));
        else if (!part.empty())
            throw civ::Error(civ::errc::syntax, "tuple spec must look like \"Z=A,B;W=C\"");
    }
}

json names_json(const std::vector<std::string>& names) { return json(names); }

json set_json(const civ::Admg& g, const civ::NodeSet& s) { return json(g.names_of(s)); }

void emit(const json& j, bool as_json) {
    if (as_json) {
        std::cout << j.dump() << '\n';
    } else {
        std::cout << j.dump(2) << '\n';
    }
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw civ::Error(civ::errc::io, "cannot write '" + path + "'");
    out << content;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graphical selection of conditional instrumental sets"};
    app.require_subcommand(1);

    std::string graph_path, sem_path, data_path, x = "X", y = "Y";
    std::string s_arg, t_arg, w_arg, z_arg, z1_arg, w1_arg, z2_arg, w2_arg;
    std::string tuple_arg, order_arg, candidates_arg = "\x01";
    std::string label = "graph", csv_path, summary_path, sizes_arg = "20,500";
    bool tilde = false, as_json = false, use_ols = false, original_guards = false;
    int models = 100, datasets = 50, jobs = 1;
    std::size_t cap = 20;
    std::uint64_t seed = 1;

    auto add_graph = [&](CLI::App* cmd) {
        cmd->add_option("--graph", graph_path, "graph file")->required();
    };
    auto add_xy = [&](CLI::App* cmd, bool required = true) {
        auto ox = cmd->add_option("--x", x, "treatment node");
        auto oy = cmd->add_option("--y", y, "outcome node");
        if (required) {
            ox->required();
            oy->required();
        }
    };
    auto add_json = [&](CLI::App* cmd) {
        cmd->add_flag("--json", as_json, "compact JSON output");
    };

    CLI::App* msep = app.add_subcommand("msep", "decide m-separation");
    add_graph(msep);
    msep->add_option("--s", s_arg, "first node set (comma separated)")->required();
    msep->add_option("--t", t_arg, "second node set")->required();
    msep->add_option("--w", w_arg, "conditioning set");
    msep->add_flag("--tilde", tilde, "query the graph with X's causal out-edges removed");
    add_xy(msep, false);
    add_json(msep);

    CLI::App* validate = app.add_subcommand("validate", "check a conditional instrumental set");
    add_graph(validate);
    add_xy(validate);
    validate->add_option("--z", z_arg, "instrumental set");
    validate->add_option("--w", w_arg, "conditioning set");
    add_json(validate);

    CLI::App* enumerate = app.add_subcommand("enumerate", "list all valid tuples");
    add_graph(enumerate);
    add_xy(enumerate);
    enumerate->add_option("--candidates", candidates_arg, "candidate nodes (default: all others)");
    enumerate->add_option("--cap", cap, "candidate-count cap");
    add_json(enumerate);

    CLI::App* compare = app.add_subcommand("compare", "compare two valid tuples");
    add_graph(compare);
    add_xy(compare);
    compare->add_option("--z1", z1_arg, "first instrumental set");
    compare->add_option("--w1", w1_arg, "first conditioning set");
    compare->add_option("--z2", z2_arg, "second instrumental set");
    compare->add_option("--w2", w2_arg, "second conditioning set");
    add_json(compare);

    CLI::App* greedy = app.add_subcommand("greedy", "grow a valid tuple greedily");
    add_graph(greedy);
    add_xy(greedy);
    greedy->add_option("--z", z_arg, "start instrumental set");
    greedy->add_option("--w", w_arg, "start conditioning set");
    greedy->add_option("--order", order_arg, "visiting order (comma separated)");
    greedy->add_flag("--original-guards", original_guards,
                     "evaluate dependence guards against the start tuple");
    add_json(greedy);

    CLI::App* optimal = app.add_subcommand("optimal", "district-based optimal tuple");
    add_graph(optimal);
    add_xy(optimal);
    add_json(optimal);

    CLI::App* avar = app.add_subcommand("avar", "asymptotic variance of a tuple under a model");
    add_graph(avar);
    avar->add_option("--sem", sem_path, "SEM parameter file (JSON)")->required();
    add_xy(avar);
    avar->add_option("--tuple", tuple_arg, "tuple spec \"Z=A,B;W=C\"")->required();
    add_json(avar);

    CLI::App* estimate = app.add_subcommand("estimate", "finite-sample estimate from CSV data");
    estimate->add_option("--data", data_path, "CSV file with a header of node names")->required();
    add_xy(estimate);
    estimate->add_option("--tuple", tuple_arg, "tuple spec \"Z=A,B;W=C\"");
    estimate->add_flag("--ols", use_ols, "ordinary least squares of Y on X and --w");
    estimate->add_option("--w", w_arg, "conditioning set for --ols");
    add_json(estimate);

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo tuple benchmark");
    add_graph(simulate);
    add_xy(simulate);
    simulate->add_option("--label", label, "graph label in the output");
    simulate->add_option("--models", models, "number of random models");
    simulate->add_option("--datasets", datasets, "datasets per model and size");
    simulate->add_option("--sizes", sizes_arg, "sample sizes, comma separated");
    simulate->add_option("--seed", seed, "base seed");
    simulate->add_option("--jobs", jobs, "worker threads");
    simulate->add_option("--csv", csv_path, "write per-model rows to this CSV file");
    simulate->add_option("--summary", summary_path, "write the JSON summary to this file");
    add_json(simulate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (msep->parsed()) {
            civ::Admg g = civ::load_graph(graph_path);
            if (tilde) g = civ::remove_causal_out_edges(g, g.index_of(x), g.index_of(y));
            bool sep = civ::m_separated(g, g.node_set(split_names(s_arg)),
                                        g.node_set(split_names(t_arg)),
                                        g.node_set(split_names(w_arg)));
            emit(json{{"separated", sep}}, as_json);
        } else if (validate->parsed()) {
            civ::Admg g = civ::load_graph(graph_path);
            civ::CondInstrumentSet t{g.node_set(split_names(z_arg)), g.node_set(split_names(w_arg))};
            auto r = civ::is_valid_cis(g, g.index_of(x), g.index_of(y), t);
            emit(json{{"valid", r.valid},
                      {"conditions", {{"i", r.cond_i}, {"ii", r.cond_ii}, {"iii", r.cond_iii}}}},
                 as_json);
        } else if (enumerate->parsed()) {
            civ::Admg g = civ::load_graph(graph_path);
            std::vector<civ::CondInstrumentSet> tuples;
            if (candidates_arg != "\x01") {
                civ::NodeSet cand = g.node_set(split_names(candidates_arg));
                tuples = civ::enumerate_valid_cis(g, g.index_of(x), g.index_of(y), &cand, cap);
            } else {
                tuples = civ::enumerate_valid_cis(g, g.index_of(x), g.index_of(y), nullptr, cap);
            }
            json arr = json::array();
            for (const auto& t : tuples)
                arr.push_back(json{{"Z", set_json(g, t.z)}, {"W", set_json(g, t.w)}});
            emit(json{{"count", tuples.size()}, {"tuples", arr}}, as_json);
        } else if (compare->parsed()) {
            civ::Admg g = civ::load_graph(graph_path);
            civ::CondInstrumentSet t1{g.node_set(split_names(z1_arg)),
                                      g.node_set(split_names(w1_arg))};
            civ::CondInstrumentSet t2{g.node_set(split_names(z2_arg)),
                                      g.node_set(split_names(w2_arg))};
            civ::Dominance d = civ::compare_cis(g, g.index_of(x), g.index_of(y), t1, t2);
            auto arr = [](const civ::ComparisonConditions& c) {
                return json::array({c.residual_ok, c.w1_extra_ok, c.w2_extra_ok, c.z1_extra_ok});
            };
            emit(json{{"verdict", civ::to_string(d.verdict)},
                      {"forward", arr(d.forward)},
                      {"reverse", arr(d.reverse)}},
                 as_json);
        } else if (greedy->parsed()) {
            civ::Admg g = civ::load_graph(graph_path);
            civ::CondInstrumentSet start{g.node_set(split_names(z_arg)),
                                         g.node_set(split_names(w_arg))};
            std::vector<int> order;
            std::vector<int>* order_ptr = nullptr;
            if (!order_arg.empty()) {
                for (const auto& name : split_names(order_arg)) order.push_back(g.index_of(name));
                order_ptr = &order;
            }
            civ::GreedyTrace trace = civ::greedy_forward(
                g, g.index_of(x), g.index_of(y), start, order_ptr,
                original_guards ? civ::GuardSets::Original : civ::GuardSets::Running);
            json steps = json::array();
            for (const auto& st : trace.steps)
                steps.push_back(json{{"node", g.name(st.node)},
                                     {"action", civ::to_string(st.action)},
                                     {"reason", st.reason}});
            json result{{"Z", set_json(g, trace.result.z)}, {"W", set_json(g, trace.result.w)}};
            if (as_json) {
                json order_names = json::array();
                for (int v : trace.order) order_names.push_back(g.name(v));
                emit(json{{"result", result}, {"steps", steps}, {"order", order_names}}, true);
            } else {
                for (const auto& st : trace.steps)
                    std::cout << g.name(st.node) << '\t' << civ::to_string(st.action) << '\t'
                              << st.reason << '\n';
                std::cout << result.dump() << '\n';
            }
        } else if (optimal->parsed()) {
            civ::Admg g = civ::load_graph(graph_path);
            civ::OptimalResult r = civ::optimal_cis(g, g.index_of(x), g.index_of(y));
            emit(json{{"Z_opt", set_json(g, r.z_opt)},
                      {"W_opt", set_json(g, r.w_opt)},
                      {"valid", r.is_valid},
                      {"certified", r.optimality_certified}},
                 as_json);
        } else if (avar->parsed()) {
            civ::Admg g = civ::load_graph(graph_path);
            civ::LinearSem sem = civ::load_linear_sem(g, sem_path);
            std::vector<std::string> z, w;
            parse_tuple_spec(tuple_arg, z, w);
            int xi = g.index_of(x), yi = g.index_of(y);
            civ::CondInstrumentSet t{g.node_set(z), g.node_set(w)};
            if (!civ::is_valid_cis(g, xi, yi, t).valid)
                throw civ::Error(civ::errc::invalid_tuple,
                                 "tuple is not a valid conditional instrumental set here");
            civ::CovModel cov = civ::implied_covariance(sem);
            double tau = civ::total_effect(sem, xi, yi);
            json out{{"residual_variance", civ::residual_variance(cov, tau, x, y, w)},
                     {"strength", civ::instrument_strength(cov, x, z, w)},
                     {"avar_new", civ::avar_new_formula(cov, tau, x, y, z, w)},
                     {"avar_traditional", civ::avar_traditional(cov, x, y, z, w)}};
            if (civ::is_valid_adjustment(g, xi, yi, t.w))
                out["avar_ols_if_adjustment"] = civ::avar_ols(cov, x, y, w);
            else
                out["avar_ols_if_adjustment"] = nullptr;
            emit(out, as_json);
        } else if (estimate->parsed()) {
            civ::DataMatrix data = civ::load_csv(data_path);
            civ::EstimateReport r{};
            if (use_ols) {
                r = civ::ols(data, x, y, split_names(w_arg));
            } else {
                if (tuple_arg.empty())
                    throw civ::Error(civ::errc::precondition, "provide --tuple or --ols");
                std::vector<std::string> z, w;
                parse_tuple_spec(tuple_arg, z, w);
                r = civ::tsls(data, x, y, z, w);
            }
            emit(json{{"estimate", r.estimate},
                      {"sample_strength", r.sample_strength},
                      {"sample_residual_var", r.sample_residual_var},
                      {"n", r.n}},
                 as_json);
        } else if (simulate->parsed()) {
            civ::StudyConfig cfg{civ::load_graph(graph_path)};
            cfg.graph_label = label;
            cfg.x = x;
            cfg.y = y;
            cfg.n_models = models;
            cfg.n_datasets = datasets;
            cfg.sample_sizes.clear();
            for (const auto& s : split_names(sizes_arg)) cfg.sample_sizes.push_back(std::stol(s));
            cfg.base_seed = seed;
            cfg.jobs = jobs;
            civ::StudyResult res = civ::run_study(cfg);
            json rows = json::array();
            for (const auto& s : res.summary)
                rows.push_back(json{{"tuple", s.tuple},
                                    {"n", s.n},
                                    {"geo_mean_ratio", s.geo_mean_ratio},
                                    {"frac_ratio_lt_1", s.frac_ratio_lt_1}});
            json summary{{"graph", res.graph_label}, {"optimal", res.optimal_label},
                         {"summaries", rows}};
            if (!csv_path.empty()) write_file(csv_path, res.to_csv());
            if (!summary_path.empty()) write_file(summary_path, summary.dump(2) + "\n");
            emit(summary, as_json);
        }
    } catch (const civ::Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
