#pragma once

#include <string>
#include <vector>

#include "safem/exact_solutions.hpp"
#include "safem/ocp.hpp"

namespace safem {

enum class Marking { maximum, split };

struct RunConfig {
    int example_id = 1;
    double alpha = 1.5;
    double lambda_override = -1.0;  // <= 0 keeps the example default
    Marking marking = Marking::maximum;
    double theta = 0.5;             // theta = 0 marks every element (uniform mode)
    int max_iterations = 25;
    long max_ndof = 500000;
    std::string out_dir;            // empty: nothing written
    bool dump_meshes = false;
    int grading_depth = 6;
    int error_grading_depth = 30;
    int lattice_order = 5;
    int pdas_cap = 50;
};

/// One record.csv row; error fields are only meaningful when has_error is set.
struct RunRow {
    int iter = 0;
    long ndof = 0;
    int nelem = 0;
    double est_ocp = 0, est_st_max = 0, est_st_energy = 0, est_ad = 0, est_ct = 0;
    bool has_error = false;
    double err_total = 0, err_y_inf = 0, err_p_l2 = 0, err_z_w = 0, err_r_w = 0, err_u_l2 = 0;
    double effectivity = 0;
    double ell = 0;
    int pdas_iters = 0;
    double wall_s = 0;
};

struct RunRecord {
    std::vector<RunRow> rows;
};

/// Maximum-strategy marking on squared local indicators: an element is marked
/// when its value strictly exceeds theta times the largest one. Never returns
/// an empty set (ties fall back to the lowest argmax); theta = 0 marks all.
std::vector<int> mark_indicators(const std::vector<double>& indicator_sq, double theta);

/// Driver-level marking: the maximum strategy uses the combined indicator; the
/// split strategy marks the union of the state+adjoint part and the control
/// part, each against its own maximum.
std::vector<int> mark(const EstimatorBreakdown& b, Marking strategy, double theta);

/// Least-squares slope of log(values) against log(ndof) over the last `tail`
/// rows. Throws on fewer than 2 usable rows or nonpositive data.
double fit_rate(const std::vector<double>& ndof, const std::vector<double>& values, int tail);

/// Total unknown count reported in records: all stored coefficients of the
/// quintuple (two vector P2 fields and the control, two P1 pressures).
long count_ndof(const DofMap& dofs);

/// Adaptive loop for the tracking control problem (examples 1..3): solve,
/// estimate, record, mark, bisect. Writes record.csv (plus optional mesh and
/// indicator dumps) under cfg.out_dir.
RunRecord run_ocp(const RunConfig& cfg);

/// Stokes study on the example-1 state pair: energy-driven refinement with the
/// energy and max-norm estimators recorded against the exact errors.
RunRecord run_stokes_manufactured(int max_iterations, long max_ndof, double theta,
                                  const std::string& out_dir);

/// Dirac point-source study: Stokeslet boundary data, refinement driven by the
/// weighted indicators, weighted errors against the fundamental solution.
RunRecord run_delta(double alpha, const Point2& point, const Vec2& force, int max_iterations,
                    long max_ndof, double theta, const std::string& out_dir);

void write_record_csv(std::ostream& out, const RunRecord& rec);

}  // namespace safem
