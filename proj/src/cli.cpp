#include "ghdpp/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ghdpp/dpp.hpp"
#include "ghdpp/experiments.hpp"
#include "ghdpp/mc.hpp"
#include "ghdpp/parallel.hpp"
#include "ghdpp/rmt.hpp"
#include "ghdpp/spherical.hpp"

#ifndef GHDPP_GIT_DESCRIBE
#define GHDPP_GIT_DESCRIBE "unknown"
#endif

namespace ghdpp::cli {

using nlohmann::json;

void write_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

namespace {

class Csv {
  public:
    Csv() { os_ << std::setprecision(17); }
    template <class... T>
    void row(const T&... fields) {
        bool first = true;
        ((os_ << (first ? "" : ",") << fields, first = false), ...);
        os_ << '\n';
    }
    std::ostringstream& stream() { return os_; }
    std::string str() const { return os_.str(); }

  private:
    std::ostringstream os_;
};

std::vector<int> parse_int_list(const std::string& spec) {
    std::vector<int> out;
    if (spec.find(':') != std::string::npos) {
        int lo = 0, hi = 0, step = 1;
        char c1 = 0, c2 = 0;
        std::istringstream in(spec);
        in >> lo >> c1 >> hi >> c2 >> step;
        if (!in || c1 != ':' || c2 != ':' || step <= 0) throw CLI::ValidationError("grid must be lo:hi:step");
        for (int v = lo; v <= hi; v += step) out.push_back(v);
        return out;
    }
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw CLI::ValidationError("not an integer list: " + spec);
        }
    }
    if (out.empty()) throw CLI::ValidationError("empty integer list");
    return out;
}

json counters_json(const rmt::RejectionCounters& c) {
    return {{"proposals", c.proposals}, {"accepts", c.accepts}, {"rate", c.rate()}};
}

json counters_json(const dpp::StageCounters& c) {
    return {{"rho", counters_json(c.rho)},
            {"general", counters_json(c.general)},
            {"chain", counters_json(c.chain)},
            {"jitter_events", c.jitter_events},
            {"restarts", c.restarts}};
}

std::string default_created() { return std::string("ghdpp ") + GHDPP_GIT_DESCRIBE; }

struct Common {
    std::uint64_t seed = 0;
    int threads = 1;
    std::string calibration;
};

json manifest(const std::string& command, const json& config) {
    const std::string table = rmt::CalibrationTable::shared().to_json(default_created()).dump();
    return {{"command", command},
            {"config", config},
            {"git_describe", GHDPP_GIT_DESCRIBE},
            {"calibration_table_hash", fnv1a_hex(table)}};
}

void load_calibration(const Common& common) {
    std::string path = common.calibration;
    if (path.empty())
        if (const char* env = std::getenv(kCalibrationEnv)) path = env;
    if (path.empty()) return;
    auto table = rmt::CalibrationTable::load(path);
    for (const auto& c : table.entries()) rmt::CalibrationTable::shared().insert(c);
}

// --- sample-dpp -------------------------------------------------------------

struct SampleDppArgs {
    int dim = 2;
    int n_points = 0;
    int reps = 1;
    std::string out;
    std::string method = "chain";
};

void run_sample_dpp(const Common& common, const SampleDppArgs& a) {
    if (a.method == "gue" && a.dim != 1) throw CLI::ValidationError("--method gue requires --dim 1");
    const Stream root(common.seed);
    std::vector<dpp::DppSample> samples(static_cast<std::size_t>(a.reps));
    std::optional<dpp::Sampler> sampler;
    if (a.method == "chain") sampler.emplace(a.n_points, a.dim);
    parallel_for(a.reps, common.threads, [&](int r) {
        Stream rng = root.derive(static_cast<std::uint64_t>(r));
        samples[static_cast<std::size_t>(r)] =
            sampler ? sampler->sample(rng) : dpp::sample_dpp_1d_gue(a.n_points, rng);
    });
    Csv csv;
    auto& os = csv.stream();
    os << "rep,point_index";
    for (int l = 1; l <= a.dim; ++l) os << ",x_" << l;
    os << '\n';
    json reps = json::array();
    dpp::StageCounters total;
    for (int r = 0; r < a.reps; ++r) {
        const auto& s = samples[static_cast<std::size_t>(r)];
        for (int i = 0; i < s.n_points; ++i) {
            os << r << ',' << i;
            for (int l = 0; l < a.dim; ++l) os << ',' << s.points(i, l);
            os << '\n';
        }
        reps.push_back({{"rep", r}, {"seed", s.seed}, {"counters", counters_json(s.counters)}});
        total += s.counters;
    }
    json side = manifest("sample-dpp", {{"dim", a.dim}, {"n_points", a.n_points}, {"reps", a.reps},
                                        {"seed", common.seed}, {"method", a.method}});
    side["reps"] = reps;
    side["totals"] = counters_json(total);
    write_atomic(a.out, csv.str());
    write_atomic(a.out + ".json", side.dump(2) + "\n");
}

// --- sample-rho -------------------------------------------------------------

struct SampleRhoArgs {
    int n = 1;
    int count = 10000;
    bool oracle = false;
    std::string out;
};

void run_sample_rho(const Common& common, const SampleRhoArgs& a) {
    Stream rng(common.seed);
    rmt::RejectionCounters counters;
    Csv csv;
    csv.row("index", "x");
    const auto& calib = rmt::CalibrationTable::shared().get(a.n);
    for (int i = 0; i < a.count; ++i) {
        const double x = a.oracle ? rmt::sample_rho_oracle(a.n, rng) : rmt::sample_rho(a.n, calib, rng, &counters);
        csv.row(i, x);
    }
    json side = manifest("sample-rho", {{"n", a.n}, {"count", a.count}, {"oracle", a.oracle}, {"seed", common.seed}});
    side["calibration"] = rmt::to_json(calib);
    side["counters"] = counters_json(counters);
    write_atomic(a.out, csv.str());
    write_atomic(a.out + ".json", side.dump(2) + "\n");
}

// --- calibrate --------------------------------------------------------------

struct CalibrateArgs {
    int n_min = 1;
    int n_max = 64;
    int grid_points = rmt::kDefaultGridPoints;
    double pad = 10.0;
    double nu = rmt::kStudentDof;
    std::string out;
    std::string created;
};

void run_calibrate(const Common& common, const CalibrateArgs& a) {
    if (a.n_min < 1 || a.n_max < a.n_min) throw CLI::ValidationError("need 1 <= n-min <= n-max");
    const int count = a.n_max - a.n_min + 1;
    std::vector<rmt::RejectionCalibration> out(static_cast<std::size_t>(count));
    parallel_for(count, common.threads, [&](int i) {
        out[static_cast<std::size_t>(i)] = rmt::calibrate(a.n_min + i, a.pad, a.grid_points, a.nu);
    });
    rmt::CalibrationTable table;
    for (const auto& c : out) table.insert(c);
    write_atomic(a.out, table.to_json(a.created.empty() ? default_created() : a.created).dump(2) + "\n");
}

// --- integrate --------------------------------------------------------------

struct IntegrateArgs {
    std::string estimator = "naive";
    int dim = 1;
    int n_points = 10;
    int reps = 30;
    int degree = -1;
    std::string monomial;
    std::string out;
};

void run_integrate(const Common& common, const IntegrateArgs& a) {
    const auto estimator = mc::parse_estimator(a.estimator);
    const Stream root(common.seed);
    experiments::PolynomialIntegrand poly;
    if (!a.monomial.empty()) {
        poly = experiments::PolynomialIntegrand::monomial(parse_int_list(a.monomial));
        if (poly.dim != a.dim) throw CLI::ValidationError("--monomial length must equal --dim");
    } else {
        Stream coeff = root.derive(0);
        poly = experiments::PolynomialIntegrand::random(a.dim, a.degree >= 0 ? a.degree : (a.dim == 1 ? 10 : 5), coeff);
    }
    const auto f = poly.integrand();
    std::optional<dpp::Sampler> sampler;
    if (estimator != mc::Estimator::Naive) sampler.emplace(a.n_points, a.dim);

    mc::EstimateReport report;
    report.estimator = a.estimator;
    report.n_points = a.n_points;
    report.dim = a.dim;
    report.seed = common.seed;
    report.truth = f.truth;
    report.estimates.resize(static_cast<std::size_t>(a.reps));
    std::vector<int> flags(static_cast<std::size_t>(a.reps), 0);
    parallel_for(a.reps, common.threads, [&](int r) {
        Stream rng = root.derive(1).derive(static_cast<std::uint64_t>(r));
        auto& slot = report.estimates[static_cast<std::size_t>(r)];
        if (estimator == mc::Estimator::Naive) {
            slot = mc::naive_estimate(f, a.n_points, rng);
            return;
        }
        const auto sample = sampler->sample(rng);
        if (estimator == mc::Estimator::BH) {
            slot = mc::bh_estimate(f, sample, sampler->kernel());
        } else {
            const auto res = mc::ez_estimate(f, sample, sampler->kernel().basis());
            slot = res.estimate;
            flags[static_cast<std::size_t>(r)] = res.ill_conditioned;
        }
    });
    for (int v : flags) report.flagged += v;
    report.finalize();
    json j = manifest("integrate", {{"estimator", a.estimator}, {"dim", a.dim}, {"n_points", a.n_points},
                                    {"reps", a.reps}, {"seed", common.seed}, {"degree", poly.degree}});
    j["report"] = report.to_json();
    j["polynomial"] = {{"dim", poly.dim}, {"degree", poly.degree}, {"coefficients", poly.coeffs}};
    j["measure"] = "exp(-|x|^2/2) dx";
    write_atomic(a.out, j.dump(2) + "\n");
}

// --- experiment -------------------------------------------------------------

struct ExperimentArgs {
    std::string which;
    int reps = 30;
    std::string out_dir;
    std::string dims = "1,2,3";
    std::string n_grid;
};

void run_experiment_poly(const Common& common, const ExperimentArgs& a) {
    const auto dims = parse_int_list(a.dims);
    const auto grid = parse_int_list(a.n_grid.empty() ? "5:60:5" : a.n_grid);
    json files = json::array();
    for (int d : dims) {
        const int degree = d == 1 ? 10 : 5;
        const auto result = experiments::run_poly_experiment(d, degree, grid, a.reps,
                                                             Stream(common.seed).derive(static_cast<std::uint64_t>(d)).key(),
                                                             common.threads);
        Csv csv;
        csv.row("estimator", "N", "mean", "std", "truth", "ill_conditioned");
        for (const auto& r : result.rows) csv.row(r.estimator, r.n_points, r.mean, r.stddev, r.truth, r.ill_conditioned);
        const std::string name = "poly_d" + std::to_string(d) + ".csv";
        write_atomic((std::filesystem::path(a.out_dir) / name).string(), csv.str());
        files.push_back({{"file", name}, {"dim", d}, {"degree", degree}, {"truth", result.truth},
                         {"coefficients", result.polynomial.coeffs}});
    }
    json m = manifest("experiment poly", {{"seed", common.seed}, {"reps", a.reps}, {"dims", dims}, {"n_grid", grid}});
    m["outputs"] = files;
    write_atomic((std::filesystem::path(a.out_dir) / "manifest.json").string(), m.dump(2) + "\n");
}

void run_experiment_gp(const Common& common, const ExperimentArgs& a) {
    experiments::GpExperimentConfig config;
    config.seed = common.seed;
    config.reps = a.reps;
    config.threads = common.threads;
    if (!a.n_grid.empty()) config.n_grid = parse_int_list(a.n_grid);
    const auto res = experiments::run_gp_experiment(config);
    const std::filesystem::path dir(a.out_dir);

    Csv data;
    data.row("x", "y");
    for (Eigen::Index i = 0; i < res.data.x.size(); ++i) data.row(res.data.x[i], res.data.y[i]);
    write_atomic((dir / "gp_data.csv").string(), data.str());

    Csv post;
    post.row("x", "point_mean", "point_std", "ez_mean_bar", "ez_std_bar", "ref_mean_bar", "ref_std_bar");
    for (Eigen::Index t = 0; t < res.test_x.size(); ++t)
        post.row(res.test_x[t], res.point.mean[t], res.point.stddev[t], res.ez_marginal.mean[t],
                 res.ez_marginal.stddev[t], res.reference.mean[t], res.reference.stddev[t]);
    write_atomic((dir / "gp_posterior.csv").string(), post.str());

    Csv summary;
    summary.row("estimator", "N", "level", "mean_std", "std_of_std");
    Csv points;
    points.row("estimator", "N", "test_index", "level", "std", "mean");
    for (const auto& cell : res.cells) {
        for (Eigen::Index l = 0; l < cell.stddev.cols(); ++l) {
            std::vector<double> col(cell.stddev.col(l).data(), cell.stddev.col(l).data() + cell.stddev.rows());
            summary.row(mc::to_string(cell.estimator), cell.n_points, experiments::kCdfLevels[static_cast<std::size_t>(l)],
                        mc::mean(col), mc::sample_stddev(col));
            for (Eigen::Index t = 0; t < cell.stddev.rows(); ++t)
                points.row(mc::to_string(cell.estimator), cell.n_points, t,
                           experiments::kCdfLevels[static_cast<std::size_t>(l)], cell.stddev(t, l), cell.mean(t, l));
        }
    }
    write_atomic((dir / "gp_cdf.csv").string(), summary.str());
    write_atomic((dir / "gp_cdf_points.csv").string(), points.str());

    json m = manifest("experiment gp", {{"seed", common.seed}, {"reps", a.reps}, {"n_grid", config.n_grid},
                                        {"n_train", config.n_train}, {"n_test", config.n_test},
                                        {"noise_variance", experiments::kGpNoiseVariance}});
    m["theta_star"] = {res.fit.theta[0], res.fit.theta[1]};
    m["log_marginal_likelihood"] = res.fit.log_ml;
    m["fit_converged"] = res.fit.converged;
    m["outputs"] = {"gp_data.csv", "gp_posterior.csv", "gp_cdf.csv", "gp_cdf_points.csv"};
    write_atomic((dir / "manifest.json").string(), m.dump(2) + "\n");
}

// --- spherical-diag ---------------------------------------------------------

struct SphericalArgs {
    int dim = 3;
    std::string index;
    int trials = 100000;
    std::string out;
};

void run_spherical(const Common& common, const SphericalArgs& a) {
    const spherical::SphericalIndex index(parse_int_list(a.index));
    if (index.dim() != a.dim) throw CLI::ValidationError("--index length must equal --dim");
    Stream rng(common.seed);
    const auto rep = spherical::acceptance_report(index, a.trials, rng);
    json j = manifest("spherical-diag", {{"dim", a.dim}, {"index", a.index}, {"trials", a.trials}, {"seed", common.seed}});
    j.update(rep.to_json());
    write_atomic(a.out, j.dump(2) + "\n");
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
    std::string dims = "1,2,3,4";
    std::string n_grid = "10:200:10";
    int reps = 30;
    std::string out;
};

void run_bench(const Common& common, const BenchArgs& a) {
    const auto dims = parse_int_list(a.dims);
    const auto grid = parse_int_list(a.n_grid);
    const Stream root(common.seed);
    Csv csv;
    csv.row("d", "N", "reps", "mean_s", "std_s", "rho_rate", "general_rate", "chain_rate");
    json records = json::array();
    for (int d : dims) {
        for (int N : grid) {
            const dpp::Sampler sampler(N, d);
            std::vector<double> times;
            dpp::StageCounters total;
            for (int r = 0; r < a.reps; ++r) {
                Stream rng = root.derive(static_cast<std::uint64_t>(d)).derive(static_cast<std::uint64_t>(N)).derive(
                    static_cast<std::uint64_t>(r));
                const auto t0 = std::chrono::steady_clock::now();
                const auto s = sampler.sample(rng);
                const auto t1 = std::chrono::steady_clock::now();
                times.push_back(std::chrono::duration<double>(t1 - t0).count());
                total += s.counters;
            }
            csv.row(d, N, a.reps, mc::mean(times), mc::sample_stddev(times), total.rho.rate(), total.general.rate(),
                    total.chain.rate());
            records.push_back({{"d", d}, {"N", N}, {"times", times}, {"counters", counters_json(total)}});
        }
    }
    json side = manifest("bench", {{"dims", dims}, {"n_grid", grid}, {"reps", a.reps}, {"seed", common.seed}});
    side["records"] = records;
    write_atomic(a.out, csv.str());
    write_atomic(a.out + ".json", side.dump(2) + "\n");
}

// --- compare ----------------------------------------------------------------

struct CompareArgs {
    int n_points = 500;
    std::string out_dir;
};

void run_compare(const Common& common, const CompareArgs& a) {
    const Stream root(common.seed);
    const std::filesystem::path dir(a.out_dir);
    auto write_points = [&](const std::string& name, const Eigen::MatrixXd& pts) {
        Csv csv;
        csv.row("point_index", "x_1", "x_2");
        for (Eigen::Index i = 0; i < pts.rows(); ++i) csv.row(i, pts(i, 0), pts(i, 1));
        write_atomic((dir / name).string(), csv.str());
    };
    Stream dpp_rng = root.derive(0);
    write_points("dpp.csv", dpp::sample_dpp(a.n_points, 2, dpp_rng).points);

    Stream iid_rng = root.derive(1);
    Eigen::MatrixXd iid(a.n_points, 2);
    for (int i = 0; i < a.n_points; ++i) iid.row(i) << iid_rng.normal(), iid_rng.normal();
    write_points("iid.csv", iid);

    Stream pp_rng = root.derive(2);
    const double half = 2.0 * std::pow(static_cast<double>(a.n_points), 0.25);
    const auto count = static_cast<Eigen::Index>(pp_rng.poisson(a.n_points));
    Eigen::MatrixXd pp(count, 2);
    for (Eigen::Index i = 0; i < count; ++i)
        pp.row(i) << -half + 2.0 * half * pp_rng.uniform(), -half + 2.0 * half * pp_rng.uniform();
    write_points("poisson.csv", pp);

    json m = manifest("compare", {{"n_points", a.n_points}, {"seed", common.seed}});
    m["poisson_box_half_width"] = half;
    m["poisson_intensity"] = a.n_points / (4.0 * half * half);
    m["poisson_count"] = count;
    m["outputs"] = {"dpp.csv", "iid.csv", "poisson.csv"};
    write_atomic((dir / "manifest.json").string(), m.dump(2) + "\n");
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Gauss-Hermite determinantal point processes: sampling and Monte Carlo integration", "ghdpp"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "Root random seed")->capture_default_str();
        sub->add_option("--threads", common.threads, "Worker threads for repetitions")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--calibration", common.calibration,
                        std::string("Calibration table JSON (default: $") + kCalibrationEnv + ")");
    };

    SampleDppArgs sd;
    auto* sample_dpp = app.add_subcommand("sample-dpp", "Draw Gauss-Hermite DPP samples to CSV");
    sample_dpp->add_option("--dim", sd.dim)->required()->check(CLI::PositiveNumber);
    sample_dpp->add_option("--n-points", sd.n_points)->required()->check(CLI::PositiveNumber);
    sample_dpp->add_option("--reps", sd.reps)->check(CLI::PositiveNumber)->capture_default_str();
    sample_dpp->add_option("--out", sd.out)->required();
    sample_dpp->add_option("--method", sd.method)->check(CLI::IsMember({"chain", "gue"}))->capture_default_str();
    add_common(sample_dpp);

    SampleRhoArgs sr;
    auto* sample_rho = app.add_subcommand("sample-rho", "Draw from the GUE spectral density rho_n");
    sample_rho->add_option("--n", sr.n)->required()->check(CLI::PositiveNumber);
    sample_rho->add_option("--count", sr.count)->check(CLI::PositiveNumber)->capture_default_str();
    sample_rho->add_flag("--oracle", sr.oracle, "Use the GUE eigenvalue oracle instead of rejection");
    sample_rho->add_option("--out", sr.out)->required();
    add_common(sample_rho);

    CalibrateArgs ca;
    auto* calibrate = app.add_subcommand("calibrate", "Compute grid-verified rejection bounds for rho_n");
    calibrate->add_option("--n-min", ca.n_min)->check(CLI::PositiveNumber)->capture_default_str();
    calibrate->add_option("--n-max", ca.n_max)->check(CLI::PositiveNumber)->capture_default_str();
    calibrate->add_option("--grid-points", ca.grid_points)->check(CLI::Range(3, 100000000))->capture_default_str();
    calibrate->add_option("--pad", ca.pad, "Grid half-width beyond 2 sqrt(n)")->capture_default_str();
    calibrate->add_option("--nu", ca.nu, "Student-t degrees of freedom")->check(CLI::PositiveNumber)->capture_default_str();
    calibrate->add_option("--created", ca.created, "Value for the 'created' field");
    calibrate->add_option("--out", ca.out)->required();
    add_common(calibrate);

    IntegrateArgs ia;
    auto* integrate = app.add_subcommand("integrate", "Estimate a polynomial integral against e^{-|x|^2/2} dx");
    integrate->add_option("--estimator", ia.estimator)->required()->check(CLI::IsMember({"naive", "bh", "ez"}));
    integrate->add_option("--dim", ia.dim)->required()->check(CLI::PositiveNumber);
    integrate->add_option("--n-points", ia.n_points)->required()->check(CLI::PositiveNumber);
    integrate->add_option("--reps", ia.reps)->check(CLI::PositiveNumber)->capture_default_str();
    integrate->add_option("--degree", ia.degree, "Per-variable degree of the random polynomial");
    integrate->add_option("--monomial", ia.monomial, "Integrate x_1^e1 ... x_d^ed instead, e.g. 2,6");
    integrate->add_option("--out", ia.out)->required();
    add_common(integrate);

    ExperimentArgs ea;
    auto* experiment = app.add_subcommand("experiment", "Reproduce the polynomial or GP experiment");
    experiment->add_option("which", ea.which)->required()->check(CLI::IsMember({"poly", "gp"}));
    experiment->add_option("--reps", ea.reps)->check(CLI::PositiveNumber)->capture_default_str();
    experiment->add_option("--out-dir", ea.out_dir)->required();
    experiment->add_option("--dims", ea.dims, "Dimensions for the polynomial experiment")->capture_default_str();
    experiment->add_option("--n-grid", ea.n_grid, "Sample sizes, lo:hi:step or a comma list");
    add_common(experiment);

    SphericalArgs sa;
    auto* sph = app.add_subcommand("spherical-diag", "Bound and acceptance of the spherical-basis rejection sampler");
    sph->add_option("--dim", sa.dim)->required()->check(CLI::Range(2, 64));
    sph->add_option("--index", sa.index)->required();
    sph->add_option("--trials", sa.trials)->check(CLI::PositiveNumber)->capture_default_str();
    sph->add_option("--out", sa.out)->required();
    add_common(sph);

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Wall-time and rejection counters of the DPP sampler");
    bench->add_option("--dims", ba.dims)->capture_default_str();
    bench->add_option("--n-grid", ba.n_grid)->capture_default_str();
    bench->add_option("--reps", ba.reps)->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("--out", ba.out)->required();
    add_common(bench);

    CompareArgs co;
    auto* compare = app.add_subcommand("compare", "DPP, i.i.d. Gaussian and Poisson point sets in 2-D");
    compare->add_option("--n-points", co.n_points)->check(CLI::PositiveNumber)->capture_default_str();
    compare->add_option("--out-dir", co.out_dir)->required();
    add_common(compare);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        load_calibration(common);
        if (*sample_dpp) run_sample_dpp(common, sd);
        else if (*sample_rho) run_sample_rho(common, sr);
        else if (*calibrate) run_calibrate(common, ca);
        else if (*integrate) run_integrate(common, ia);
        else if (*experiment) ea.which == "poly" ? run_experiment_poly(common, ea) : run_experiment_gp(common, ea);
        else if (*sph) run_spherical(common, sa);
        else if (*bench) run_bench(common, ba);
        else if (*compare) run_compare(common, co);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args);
}

}  // namespace ghdpp::cli
