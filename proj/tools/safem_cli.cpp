// Command-line driver: adaptive runs for the tracking control benchmarks plus
// the standalone Stokes and point-source studies.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>

#include "safem/adaptivity.hpp"

namespace {

safem::Point2 parse_point(const std::string& s, const char* what) {
    safem::Point2 p;
    char comma = 0;
    std::istringstream is(s);
    if (!(is >> p.x >> comma >> p.y) || comma != ',')
        throw CLI::ValidationError(std::string(what) + ": expected \"x,y\", got \"" + s + "\"");
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive Taylor-Hood solver for pointwise tracking control of Stokes flow"};
    app.require_subcommand(1);

    // run: the full control problem
    auto* run = app.add_subcommand("run", "Adaptive loop for a benchmark control problem");
    int example = 1;
    double alpha = 1.5, theta = 0.5, lambda = -1.0;
    std::string marking = "max", out_dir = "out", point_str = "0.5,0.5", force_str = "1,1";
    int max_iter = 25;
    long max_dof = 500000;
    bool dump_meshes = false;
    run->add_option("--example", example, "Benchmark id")->check(CLI::Range(1, 3))->required();
    run->add_option("--alpha", alpha, "Weight exponent in (0,2)")->required();
    run->add_option("--marking", marking, "Marking strategy")
        ->check(CLI::IsMember({"max", "split"}));
    run->add_option("--theta", theta, "Marking fraction (0 = refine uniformly)");
    run->add_option("--max-iter", max_iter, "Maximum adaptive iterations");
    run->add_option("--max-dof", max_dof, "Stop once ndof reaches this");
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--lambda", lambda, "Regularization override");
    run->add_flag("--dump-meshes", dump_meshes, "Write per-iteration meshes and indicators");

    // stokes: plain Stokes estimator study
    auto* stokes = app.add_subcommand("stokes", "Stokes estimator study on a known solution");
    std::string stokes_case = "manufactured";
    stokes->add_option("--case", stokes_case, "Study case")
        ->check(CLI::IsMember({"manufactured"}));
    stokes->add_option("--max-iter", max_iter, "Maximum adaptive iterations");
    stokes->add_option("--max-dof", max_dof, "Stop once ndof reaches this");
    stokes->add_option("--theta", theta, "Marking fraction (0 = refine uniformly)");
    stokes->add_option("--out", out_dir, "Output directory")->required();

    // delta: point-source problem driven by the weighted estimator
    auto* delta = app.add_subcommand("delta", "Point-source Stokes study");
    delta->add_option("--alpha", alpha, "Weight exponent in (0,2)")->required();
    delta->add_option("--point", point_str, "Source location \"x,y\"");
    delta->add_option("--force", force_str, "Force vector \"fx,fy\"");
    delta->add_option("--max-iter", max_iter, "Maximum adaptive iterations");
    delta->add_option("--max-dof", max_dof, "Stop once ndof reaches this");
    delta->add_option("--theta", theta, "Marking fraction (0 = refine uniformly)");
    delta->add_option("--out", out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            safem::RunConfig cfg;
            cfg.example_id = example;
            cfg.alpha = alpha;
            cfg.lambda_override = lambda;
            cfg.marking = marking == "split" ? safem::Marking::split : safem::Marking::maximum;
            cfg.theta = theta;
            cfg.max_iterations = max_iter;
            cfg.max_ndof = max_dof;
            cfg.out_dir = out_dir;
            cfg.dump_meshes = dump_meshes;
            const safem::RunRecord rec = safem::run_ocp(cfg);
            std::cout << "wrote " << rec.rows.size() << " iterations to " << out_dir
                      << "/record.csv\n";
        } else if (stokes->parsed()) {
            const safem::RunRecord rec =
                safem::run_stokes_manufactured(max_iter, max_dof, theta, out_dir);
            std::cout << "wrote " << rec.rows.size() << " iterations to " << out_dir
                      << "/record.csv\n";
        } else {
            const safem::Point2 p = parse_point(point_str, "--point");
            const safem::Point2 f = parse_point(force_str, "--force");
            const safem::RunRecord rec = safem::run_delta(
                alpha, p, safem::Vec2{f.x, f.y}, max_iter, max_dof, theta, out_dir);
            std::cout << "wrote " << rec.rows.size() << " iterations to " << out_dir
                      << "/record.csv\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
