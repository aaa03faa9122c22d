// Command-line front end: train, predict, evaluate, pool, simulate, benchmark.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "riskscore/baselines.hpp"
#include "riskscore/evaluation.hpp"
#include "riskscore/solver.hpp"

namespace rs = riskscore;

namespace {

constexpr const char* kVersion = "riskscore 1.0.0";

struct CommonOptions {
    std::string data_path;
    std::string outcome;
    std::string constraints_path;
    std::int64_t coef_min = -5;
    std::int64_t coef_max = 5;
    std::int64_t intercept_min = -100;
    std::int64_t intercept_max = 100;
    std::int64_t max_size = -1;  // -1: no model size constraint
    double c0 = 1e-6;
    double gap_tol = 0.0;
    double time_limit = 1200.0;
    std::uint64_t node_limit = 0;  // 0: unlimited
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out_dir = ".";
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt, bool needs_data = true) {
    auto* data = cmd->add_option("--data", opt.data_path, "training data CSV");
    if (needs_data) data->required();
    data->envname("RISKSCORE_DATA");
    cmd->add_option("--outcome", opt.outcome, "outcome column name (default: first column)")
        ->envname("RISKSCORE_OUTCOME");
    cmd->add_option("--constraints", opt.constraints_path, "operational constraint file")
        ->envname("RISKSCORE_CONSTRAINTS");
    cmd->add_option("--max-size", opt.max_size, "model size limit (number of non-zero features)")
        ->envname("RISKSCORE_MAX_SIZE");
    cmd->add_option("--coef-min", opt.coef_min, "smallest feature coefficient")
        ->envname("RISKSCORE_COEF_MIN");
    cmd->add_option("--coef-max", opt.coef_max, "largest feature coefficient")
        ->envname("RISKSCORE_COEF_MAX");
    cmd->add_option("--intercept-min", opt.intercept_min, "smallest intercept")
        ->envname("RISKSCORE_INTERCEPT_MIN");
    cmd->add_option("--intercept-max", opt.intercept_max, "largest intercept")
        ->envname("RISKSCORE_INTERCEPT_MAX");
    cmd->add_option("--c0", opt.c0, "l0 penalty per non-zero coefficient")
        ->envname("RISKSCORE_C0");
    cmd->add_option("--gap-tol", opt.gap_tol, "stop at this optimality gap")
        ->envname("RISKSCORE_GAP_TOL");
    cmd->add_option("--time-limit", opt.time_limit, "wall-clock limit in seconds")
        ->envname("RISKSCORE_TIME_LIMIT");
    cmd->add_option("--node-limit", opt.node_limit, "branch-and-bound node limit (0 = none)")
        ->envname("RISKSCORE_NODE_LIMIT");
    cmd->add_option("--seed", opt.seed, "random seed")->envname("RISKSCORE_SEED");
    cmd->add_option("--jobs", opt.jobs, "parallel workers for folds/pools")
        ->envname("RISKSCORE_JOBS");
    cmd->add_option("--out", opt.out_dir, "output directory")->envname("RISKSCORE_OUT");
}

std::string resolved_config(const CommonOptions& opt, const std::string& command) {
    std::ostringstream ss;
    ss << "command=" << command << " data=" << opt.data_path << " outcome=" << opt.outcome
       << " constraints=" << opt.constraints_path << " max_size=" << opt.max_size
       << " coef=[" << opt.coef_min << "," << opt.coef_max << "]"
       << " intercept=[" << opt.intercept_min << "," << opt.intercept_max << "]"
       << " c0=" << rs::format_double(opt.c0) << " gap_tol=" << rs::format_double(opt.gap_tol)
       << " time_limit=" << rs::format_double(opt.time_limit)
       << " node_limit=" << opt.node_limit << " seed=" << opt.seed << " jobs=" << opt.jobs;
    return ss.str();
}

std::vector<std::pair<std::string, std::string>> file_header(const CommonOptions& opt,
                                                             const std::string& command) {
    return {{"tool", kVersion}, {"config", resolved_config(opt, command)}};
}

void write_header(std::ofstream& out, const CommonOptions& opt, const std::string& command) {
    out << "# tool: " << kVersion << "\n# config: " << resolved_config(opt, command) << "\n";
}

rs::ProblemSpec build_spec(const rs::Dataset& data, const CommonOptions& opt) {
    rs::CoefficientSet box = rs::CoefficientSet::with_intercept(
        data.dim(), opt.coef_min, opt.coef_max, opt.intercept_min, opt.intercept_max);
    std::vector<rs::OperationalConstraint> constraints;
    if (!opt.constraints_path.empty()) {
        constraints = rs::parse_constraint_file(opt.constraints_path);
    }
    if (opt.max_size >= 0) {
        constraints.push_back(rs::MaxModelSize{static_cast<std::size_t>(opt.max_size)});
    }
    return rs::ProblemSpec(data, std::move(box), opt.c0, std::move(constraints));
}

rs::SolverOptions build_solver_options(const CommonOptions& opt) {
    rs::SolverOptions sopt;
    sopt.gap_tol = opt.gap_tol;
    sopt.time_limit = opt.time_limit;
    if (opt.node_limit > 0) sopt.node_limit = opt.node_limit;
    sopt.seed = opt.seed;
    return sopt;
}

std::filesystem::path out_path(const CommonOptions& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    return std::filesystem::path(opt.out_dir) / name;
}

void write_metrics_csv(const CommonOptions& opt, const std::string& command,
                       const rs::MetricSet& metrics, const std::string& path,
                       double gap = -1.0, std::size_t model_size = 0) {
    std::ofstream out(path);
    write_header(out, opt, command);
    out << "metric,value\n";
    out << "cal_percent," << rs::format_double(metrics.cal) << "\n";
    out << "auc," << rs::format_double(metrics.auc) << "\n";
    out << "loss," << rs::format_double(metrics.loss) << "\n";
    out << "model_size," << model_size << "\n";
    if (gap >= 0.0) out << "optimality_gap," << rs::format_double(gap) << "\n";
}

void write_reliability_csv(const CommonOptions& opt, const std::string& command,
                           const rs::ReliabilityDiagram& diagram, const std::string& path) {
    std::ofstream out(path);
    write_header(out, opt, command);
    out << "predicted_risk,observed_risk,count\n";
    for (const auto& p : diagram.points) {
        out << rs::format_double(p.predicted) << ',' << rs::format_double(p.observed) << ','
            << p.count << "\n";
    }
}

int cmd_train(const CommonOptions& opt) {
    const rs::Dataset data = rs::load_csv(opt.data_path, opt.outcome);
    const rs::ProblemSpec spec = build_spec(data, opt);
    const rs::SolverOptions sopt = build_solver_options(opt);

    rs::SolveResult result;
    try {
        result = rs::lcpa_solve(spec, sopt);
    } catch (const rs::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    }

    rs::RiskScoreModel model;
    model.coefficients = result.best;
    model.names = data.names();
    model.method = "lcpa";
    model.options_digest = resolved_config(opt, "train");
    model.gap = result.gap;
    rs::save_model(model, out_path(opt, "model.txt").string());

    const rs::MetricSet metrics = rs::evaluate_model(model, data);
    write_metrics_csv(opt, "train", metrics, out_path(opt, "metrics.csv").string(), result.gap,
                      spec.support_size(model.coefficients));
    write_reliability_csv(opt, "train", rs::reliability_diagram(model, data),
                          out_path(opt, "reliability.csv").string());
    rs::write_trace_csv(result.trace, out_path(opt, "trace.csv").string(),
                        file_header(opt, "train"));

    const rs::RiskTable table = rs::render_risk_table(model, data);
    std::cout << table.rendered;
    std::cout << "termination: " << rs::to_string(result.termination) << "\n";
    std::cout << "objective: " << rs::format_double(result.objective)
              << "  lower_bound: " << rs::format_double(result.lower_bound)
              << "  gap: " << rs::format_double(result.gap) << "\n";
    std::cout << "nodes: " << result.stats.nodes << "  cuts: " << result.stats.cuts
              << "  time_s: " << rs::format_double(result.stats.wall_seconds) << "\n";

    if (result.termination == rs::Termination::TimeLimit ||
        result.termination == rs::Termination::NodeLimit) {
        return 3;
    }
    return 0;
}

int cmd_predict(const CommonOptions& opt, const std::string& model_path) {
    const rs::Dataset data = rs::load_csv(opt.data_path, opt.outcome);
    const rs::RiskScoreModel stored = rs::load_model(model_path);

    // Align stored features with dataset columns by name.
    std::vector<std::string> missing;
    rs::RiskScoreModel model;
    model.names = data.names();
    model.coefficients.assign(data.dim() + 1, 0);
    model.coefficients[0] = stored.coefficients[0];
    for (std::size_t j = 1; j < stored.names.size(); ++j) {
        try {
            model.coefficients[data.feature_index(stored.names[j])] = stored.coefficients[j];
        } catch (const rs::ArgumentError&) {
            missing.push_back(stored.names[j]);
        }
    }
    if (!missing.empty()) {
        std::cerr << "model features missing from data:";
        for (const auto& name : missing) std::cerr << ' ' << name;
        std::cerr << "\n";
        return 1;
    }

    std::ofstream out(out_path(opt, "predictions.csv"));
    write_header(out, opt, "predict");
    out << "score,risk\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double s = model.score(data, i);
        out << rs::format_double(s) << ',' << rs::format_double(rs::predicted_risk(s)) << "\n";
    }
    return 0;
}

int cmd_evaluate(const CommonOptions& opt, const std::string& model_path) {
    const rs::Dataset data = rs::load_csv(opt.data_path, opt.outcome);
    const rs::RiskScoreModel stored = rs::load_model(model_path);
    std::vector<std::string> missing;
    rs::RiskScoreModel model;
    model.names = data.names();
    model.coefficients.assign(data.dim() + 1, 0);
    model.coefficients[0] = stored.coefficients[0];
    for (std::size_t j = 1; j < stored.names.size(); ++j) {
        try {
            model.coefficients[data.feature_index(stored.names[j])] = stored.coefficients[j];
        } catch (const rs::ArgumentError&) {
            missing.push_back(stored.names[j]);
        }
    }
    if (!missing.empty()) {
        std::cerr << "model features missing from data:";
        for (const auto& name : missing) std::cerr << ' ' << name;
        std::cerr << "\n";
        return 1;
    }
    const rs::MetricSet metrics = rs::evaluate_model(model, data);
    write_metrics_csv(opt, "evaluate", metrics, out_path(opt, "metrics.csv").string(), -1.0,
                      [&] {
                          std::size_t s = 0;
                          for (std::size_t j = 1; j < model.coefficients.size(); ++j) {
                              s += model.coefficients[j] != 0;
                          }
                          return s;
                      }());
    write_reliability_csv(opt, "evaluate", rs::reliability_diagram(model, data),
                          out_path(opt, "reliability.csv").string());
    std::cout << "cal: " << rs::format_double(metrics.cal)
              << "%  auc: " << rs::format_double(metrics.auc)
              << "  loss: " << rs::format_double(metrics.loss) << "\n";
    return 0;
}

int cmd_pool(const CommonOptions& opt, const std::string& post_name, std::size_t mixings,
             std::size_t penalties, bool nested) {
    const rs::Dataset data = rs::load_csv(opt.data_path, opt.outcome);
    const rs::ProblemSpec spec = build_spec(data, opt);
    const rs::PostProcessor post = rs::post_processor_from_string(post_name);
    const rs::PoolGrid grid = rs::default_pool_grid(data, mixings, penalties);
    const rs::PoolReport report =
        rs::pooled_pipeline(data, grid, post, spec, 5, opt.seed, nested, opt.jobs);

    std::ofstream out(out_path(opt, "pool_report.csv"));
    write_header(out, opt, "pool");
    out << "mixing,penalty,post,feasible,cv_auc,train_loss,model_size\n";
    for (const auto& e : report.entries) {
        std::size_t size = 0;
        for (std::size_t j = 1; j < e.coefficients.size(); ++j) size += e.coefficients[j] != 0;
        out << rs::format_double(e.mixing) << ',' << rs::format_double(e.penalty) << ','
            << rs::to_string(post) << ',' << (e.feasible ? 1 : 0) << ','
            << rs::format_double(e.cv_auc) << ',' << rs::format_double(e.train_loss) << ','
            << size << "\n";
    }
    if (!report.violation_rates.empty()) {
        std::ofstream vout(out_path(opt, "pool_violations.csv"));
        write_header(vout, opt, "pool");
        vout << "constraint,violation_rate\n";
        for (const auto& [desc, rate] : report.violation_rates) {
            vout << '"' << desc << "\"," << rs::format_double(rate) << "\n";
        }
    }
    if (!report.best) {
        std::cerr << "no feasible risk score in the pool\n";
        return 2;
    }
    rs::save_model(*report.best, out_path(opt, "model.txt").string());
    const rs::MetricSet metrics = rs::evaluate_model(*report.best, data);
    std::cout << "best pool member: cal " << rs::format_double(metrics.cal) << "%  auc "
              << rs::format_double(metrics.auc) << "  loss " << rs::format_double(metrics.loss)
              << "\n";
    return 0;
}

int cmd_simulate(const CommonOptions& opt, std::vector<std::size_t> dims,
                 std::vector<std::size_t> sizes) {
    const rs::Dataset original = rs::load_csv(opt.data_path, opt.outcome);
    const rs::SyntheticCollection collection =
        rs::simulate_nested(original, dims, sizes, opt.seed);
    for (std::size_t di = 0; di < collection.dims.size(); ++di) {
        for (std::size_t si = 0; si < collection.sizes.size(); ++si) {
            const std::string name = "synthetic_d" + std::to_string(collection.dims[di]) +
                                     "_n" + std::to_string(collection.sizes[si]) + ".csv";
            rs::save_csv(collection.at(di, si), out_path(opt, name).string());
        }
    }
    std::cout << "wrote " << collection.datasets.size() << " datasets to " << opt.out_dir
              << "\n";
    return 0;
}

int cmd_benchmark(const CommonOptions& opt, double per_iteration_cap) {
    const rs::Dataset data = rs::load_csv(opt.data_path, opt.outcome);
    const rs::ProblemSpec spec = build_spec(data, opt);

    std::ofstream summary(out_path(opt, "benchmark_summary.csv"));
    write_header(summary, opt, "benchmark");
    summary << "method,time_to_good_s,final_gap,data_time_fraction,cuts,nodes,stalled\n";

    auto good_time = [](const std::vector<rs::TraceRow>& trace, double target) {
        for (const auto& row : trace) {
            if (row.objective_max <= target) return row.wall_seconds;
        }
        return -1.0;
    };

    // LCPA cold and warm-started.
    rs::SolverOptions base = build_solver_options(opt);
    base.initialize = false;
    const rs::SolveResult cold = rs::lcpa_solve(spec, base);
    rs::SolverOptions warm = build_solver_options(opt);
    warm.initialize = true;
    const rs::SolveResult warm_result = rs::lcpa_solve(spec, warm);

    const double best_obj = std::min(cold.objective, warm_result.objective);
    const double target = 1.1 * best_obj;

    auto emit = [&](const std::string& name, const rs::SolveResult& r, bool stalled) {
        const double frac =
            r.stats.wall_seconds > 0.0 ? r.stats.data_seconds / r.stats.wall_seconds : 0.0;
        summary << name << ',' << rs::format_double(good_time(r.trace, target)) << ','
                << rs::format_double(r.gap) << ',' << rs::format_double(frac) << ','
                << r.stats.cuts << ',' << r.stats.nodes << ',' << (stalled ? 1 : 0) << "\n";
        rs::write_trace_csv(r.trace, out_path(opt, "trace_" + name + ".csv").string(),
                            file_header(opt, "benchmark"));
    };
    emit("lcpa", cold, false);
    emit("lcpa_warm", warm_result, false);

    // Classic cutting planes with a surrogate MIP per iteration.
    rs::CpaOptions copts;
    copts.time_limit = opt.time_limit;
    copts.per_iteration_time_limit = per_iteration_cap;
    const rs::CpaResult cpa = rs::cpa_solve(spec, rs::CpaMode::Mip, copts);
    {
        std::ofstream iters(out_path(opt, "trace_cpa_mip_iterations.csv"));
        write_header(iters, opt, "benchmark");
        iters << "iteration,seconds,lower_bound,upper_bound,nodes\n";
        for (std::size_t k = 0; k < cpa.iterations.size(); ++k) {
            const auto& it = cpa.iterations[k];
            iters << k + 1 << ',' << rs::format_double(it.seconds) << ','
                  << rs::format_double(it.lower_bound) << ','
                  << rs::format_double(it.upper_bound) << ',' << it.nodes << "\n";
        }
    }
    const double cpa_frac = cpa.core.stats.wall_seconds > 0.0
                                ? cpa.core.stats.data_seconds / cpa.core.stats.wall_seconds
                                : 0.0;
    summary << "cpa_mip," << -1.0 << ',' << rs::format_double(cpa.core.gap) << ','
            << rs::format_double(cpa_frac) << ',' << cpa.core.stats.cuts << ','
            << cpa.core.stats.nodes << ',' << (cpa.stalled ? 1 : 0) << "\n";

    std::cout << "benchmark written to " << opt.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certifiably optimal risk scores: sparse linear classifiers with small "
                 "integer coefficients and calibrated risk estimates"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonOptions opt;

    auto* train = app.add_subcommand("train", "train a risk score with the lattice solver");
    add_common_flags(train, opt);

    std::string model_path;
    auto* predict = app.add_subcommand("predict", "score a dataset with a saved model");
    add_common_flags(predict, opt);
    predict->add_option("--model", model_path, "model file")->required();

    auto* evaluate = app.add_subcommand("evaluate", "metrics for a model on a dataset");
    add_common_flags(evaluate, opt);
    evaluate->add_option("--model", model_path, "model file")->required();

    std::string post_name = "rd_dcd";
    std::size_t pool_mixings = 11, pool_penalties = 100;
    bool pool_nested = false;
    auto* pool = app.add_subcommand("pool", "pooled penalized-logistic baselines");
    add_common_flags(pool, opt);
    pool->add_option("--post", post_name,
                     "post-processor: rd, rd_dcd, seqrd, seqrd_dcd, rsrd, rsrd_dcd, unit");
    pool->add_option("--mixings", pool_mixings, "number of elastic-net mixing values");
    pool->add_option("--penalties", pool_penalties, "number of penalty values per mixing");
    pool->add_flag("--nested", pool_nested, "nested cross-validation for fold metrics");

    std::vector<std::size_t> sim_dims{10, 20, 30};
    std::vector<std::size_t> sim_sizes{1000, 10000};
    auto* simulate = app.add_subcommand("simulate", "generate nested synthetic datasets");
    add_common_flags(simulate, opt);
    simulate->add_option("--dims", sim_dims, "feature counts (increasing)");
    simulate->add_option("--sizes", sim_sizes, "sample sizes (increasing)");

    double per_iteration_cap = 60.0;
    auto* benchmark = app.add_subcommand("benchmark", "compare LCPA, warm-started LCPA, CPA-MIP");
    add_common_flags(benchmark, opt);
    benchmark->add_option("--cpa-iteration-cap", per_iteration_cap,
                          "per-iteration time cap for the surrogate MIP (seconds)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(opt);
        if (predict->parsed()) return cmd_predict(opt, model_path);
        if (evaluate->parsed()) return cmd_evaluate(opt, model_path);
        if (pool->parsed()) {
            return cmd_pool(opt, post_name, pool_mixings, pool_penalties, pool_nested);
        }
        if (simulate->parsed()) return cmd_simulate(opt, sim_dims, sim_sizes);
        if (benchmark->parsed()) return cmd_benchmark(opt, per_iteration_cap);
    } catch (const rs::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
