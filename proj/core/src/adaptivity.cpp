#include "safem/adaptivity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "safem/quadrature.hpp"

namespace safem {

std::vector<int> mark_indicators(const std::vector<double>& indicator_sq, double theta) {
    if (indicator_sq.empty()) throw std::invalid_argument("mark: empty indicator list");
    std::vector<int> out;
    if (theta == 0.0) {
        out.resize(indicator_sq.size());
        for (std::size_t t = 0; t < indicator_sq.size(); ++t) out[t] = static_cast<int>(t);
        return out;
    }
    double max_sq = 0.0;
    int argmax = 0;
    for (std::size_t t = 0; t < indicator_sq.size(); ++t)
        if (indicator_sq[t] > max_sq) {
            max_sq = indicator_sq[t];
            argmax = static_cast<int>(t);
        }
    const double threshold = theta * max_sq;
    for (std::size_t t = 0; t < indicator_sq.size(); ++t)
        if (indicator_sq[t] > threshold) out.push_back(static_cast<int>(t));
    if (out.empty()) out.push_back(argmax);
    return out;
}

std::vector<int> mark(const EstimatorBreakdown& b, Marking strategy, double theta) {
    if (strategy == Marking::maximum) return mark_indicators(b.local_ocp_sq, theta);
    // split: state + adjoint part against its own max, OR the control part
    const std::size_t n = b.local_ocp_sq.size();
    std::vector<double> tilde_sq(n), ct_sq(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double e1 = b.state_energy.local[t], e2 = b.state_max.local[t],
                     e3 = b.adjoint.local[t];
        tilde_sq[t] = e1 * e1 + e2 * e2 + e3 * e3;
        ct_sq[t] = b.control.local[t] * b.control.local[t];
    }
    std::vector<int> a = mark_indicators(tilde_sq, theta);
    const std::vector<int> c = mark_indicators(ct_sq, theta);
    a.insert(a.end(), c.begin(), c.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

double fit_rate(const std::vector<double>& ndof, const std::vector<double>& values, int tail) {
    if (ndof.size() != values.size()) throw std::invalid_argument("fit_rate: size mismatch");
    const int n = static_cast<int>(ndof.size());
    const int use = std::min(tail, n);
    if (use < 2) throw std::invalid_argument("fit_rate: need at least two rows");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = n - use; i < n; ++i) {
        if (!(ndof[i] > 0.0) || !(values[i] > 0.0))
            throw std::invalid_argument("fit_rate: nonpositive data");
        const double x = std::log(ndof[i]), y = std::log(values[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double denom = use * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_rate: degenerate abscissae");
    return (use * sxy - sx * sy) / denom;
}

long count_ndof(const DofMap& dofs) {
    return 2L * (2 * dofs.n_p2) + 2L * dofs.n_p1 + (2 * dofs.n_p2);
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_row(std::ostream& out, const RunRow& r) {
    out << r.iter << ',' << r.ndof << ',' << r.nelem << ',' << fmt(r.est_ocp) << ','
        << fmt(r.est_st_max) << ',' << fmt(r.est_st_energy) << ',' << fmt(r.est_ad) << ','
        << fmt(r.est_ct) << ',';
    if (r.has_error)
        out << fmt(r.err_total) << ',' << fmt(r.err_y_inf) << ',' << fmt(r.err_p_l2) << ','
            << fmt(r.err_z_w) << ',' << fmt(r.err_r_w) << ',' << fmt(r.err_u_l2) << ','
            << fmt(r.effectivity) << ',';
    else
        out << ",,,,,,,";
    out << fmt(r.ell) << ',' << r.pdas_iters << ',' << fmt(r.wall_s) << '\n';
}

class RecordWriter {
  public:
    RecordWriter(const std::string& out_dir, bool dump_meshes)
        : dir_(out_dir), dump_meshes_(dump_meshes) {
        if (dir_.empty()) return;
        std::filesystem::create_directories(dir_);
        csv_.open(dir_ + "/record.csv");
        if (!csv_) throw std::runtime_error("cannot open " + dir_ + "/record.csv");
        csv_ << "iter,ndof,nelem,est_ocp,est_st_max,est_st_energy,est_ad,est_ct,err_total,"
                "err_y_inf,err_p_l2,err_z_w,err_r_w,err_u_l2,effectivity,ell_T,pdas_iters,wall_s\n";
    }
    void row(const RunRow& r) {
        if (!csv_) return;
        write_row(csv_, r);
        csv_.flush();
    }
    void mesh(int iter, const Mesh& m) {
        if (dir_.empty() || !dump_meshes_) return;
        std::ostringstream name;
        name << dir_ << "/mesh_" << std::setw(4) << std::setfill('0') << iter << ".txt";
        std::ofstream out(name.str());
        m.write_text(out);
    }
    void indicators(int iter, const EstimatorBreakdown& b) {
        if (dir_.empty() || !dump_meshes_) return;
        std::ostringstream name;
        name << dir_ << "/indicators_" << std::setw(4) << std::setfill('0') << iter << ".csv";
        std::ofstream out(name.str());
        write_indicator_csv(out, b);
    }

  private:
    std::string dir_;
    bool dump_meshes_;
    std::ofstream csv_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

RunRecord run_ocp(const RunConfig& cfg) {
    const ExactSolution exact = exact_solution(cfg.example_id, cfg.lambda_override);
    OcpProblem prob;
    prob.obs_points = exact.obs_points;
    prob.desired_states = exact.desired_states;
    prob.lambda = exact.lambda;
    prob.lower = exact.lower;
    prob.upper = exact.upper;
    prob.alpha = cfg.alpha;
    if (exact.available) {
        prob.forcing = exact.forcing;
        prob.adjoint_bc = exact.adjoint_velocity;
    }
    prob.validate();

    Mesh mesh = initial_mesh(cfg.example_id == 3 ? Domain::l_shape : Domain::unit_square);
    for (int guard = 0; !mesh.patch_separates_points(prob.obs_points); ++guard) {
        if (guard > 10) throw std::runtime_error("run_ocp: cannot separate observation points");
        mesh = uniform_refine(mesh);
    }

    RecordWriter writer(cfg.out_dir, cfg.dump_meshes);
    RunRecord rec;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        const auto t0 = Clock::now();
        const DofMap dofs = build_dofs(mesh);
        if (!mesh.patch_separates_points(prob.obs_points))
            throw std::runtime_error("run_ocp: observation points share a patch at iteration " +
                                     std::to_string(iter));
        DiscreteSolution sol;
        try {
            sol = pdas_solve(mesh, dofs, prob, cfg.pdas_cap);
        } catch (const PdasNonConvergence&) {
            throw std::runtime_error("run_ocp: active-set iteration failed to settle at iteration " +
                                     std::to_string(iter));
        }

        const WeightRho weight(prob.obs_points, cfg.alpha, mesh);
        StateEstimatorInput st;
        st.velocity = &sol.y;
        st.pressure = &sol.p;
        st.forcing = prob.forcing;
        st.control = &sol.u;
        LocalGlobal e_energy = est_state_energy(mesh, dofs, st);
        LocalGlobal e_max = est_state_max(mesh, dofs, st, cfg.lattice_order);
        std::vector<PointLoad> loads;
        for (std::size_t i = 0; i < prob.obs_points.size(); ++i)
            loads.push_back({prob.obs_points[i],
                             point_eval(mesh, dofs, sol.y, prob.obs_points[i]) -
                                 prob.desired_states[i]});
        LocalGlobal e_ad = est_adjoint(mesh, dofs, sol.z, sol.r, loads, weight, cfg.grading_depth);
        LocalGlobal e_ct =
            est_control(mesh, dofs, sol.u, sol.z, prob.lambda, prob.lower, prob.upper);
        const EstimatorBreakdown breakdown =
            combine(std::move(e_energy), std::move(e_max), std::move(e_ad), std::move(e_ct));

        RunRow row;
        row.iter = iter;
        row.ndof = count_ndof(dofs);
        row.nelem = mesh.num_elements();
        row.est_ocp = breakdown.ocp;
        row.est_st_max = breakdown.state_max.global;
        row.est_st_energy = breakdown.state_energy.global;
        row.est_ad = breakdown.adjoint.global;
        row.est_ct = breakdown.control.global;
        row.ell = mesh.metrics(prob.obs_points).ell;
        row.pdas_iters = sol.pdas_iterations;
        if (exact.available) {
            const ErrorComponents err =
                error_norms(mesh, dofs, sol.y, sol.p, sol.z, sol.r, sol.u, exact, weight,
                            cfg.lattice_order, cfg.error_grading_depth);
            row.has_error = true;
            row.err_total = err.total;
            row.err_y_inf = err.y_inf;
            row.err_p_l2 = err.p_l2;
            row.err_z_w = err.z_w;
            row.err_r_w = err.r_w;
            row.err_u_l2 = err.u_l2;
            row.effectivity = effectivity(breakdown.ocp, err.total);
        }
        row.wall_s = seconds_since(t0);
        rec.rows.push_back(row);
        writer.row(row);
        writer.mesh(iter, mesh);
        writer.indicators(iter, breakdown);

        if (row.ndof >= cfg.max_ndof || iter + 1 == cfg.max_iterations) break;
        mesh = mesh.bisect(mark(breakdown, cfg.marking, cfg.theta));
    }
    return rec;
}

RunRecord run_stokes_manufactured(int max_iterations, long max_ndof, double theta,
                                  const std::string& out_dir) {
    const ExactSolution exact = exact_solution(1);
    // momentum forcing for the plain Stokes problem (no control term)
    auto forcing = [&exact](const Point2& x) {
        return exact.forcing(x) + exact.control(x);  // -lap y + grad p
    };

    Mesh mesh = initial_mesh(Domain::unit_square);
    RecordWriter writer(out_dir, false);
    RunRecord rec;
    const auto lattice_order = 5;
    for (int iter = 0; iter < max_iterations; ++iter) {
        const auto t0 = Clock::now();
        const DofMap dofs = build_dofs(mesh);
        SaddleSystem sys = assemble(mesh, dofs);
        LoadSpec load;
        load.smooth = forcing;
        sys.rhs_velocity = assemble_load(load, mesh, dofs);
        apply_dirichlet(sys, dofs, nullptr);
        const StokesSolution sol = solve_saddle(sys);

        StateEstimatorInput st;
        st.velocity = &sol.velocity;
        st.pressure = &sol.pressure;
        st.forcing = forcing;
        const LocalGlobal e_energy = est_state_energy(mesh, dofs, st);
        const LocalGlobal e_max = est_state_max(mesh, dofs, st, lattice_order);

        // exact errors: velocity max norm, energy seminorm, pressure L2
        const QuadRule& rule = tri_rule(19);
        double y_inf = 0.0, grad_sq = 0.0, p_int = 0.0, area = 0.0;
        for (int t = 0; t < mesh.num_elements(); ++t) {
            const auto& e = mesh.element(t);
            const Point2 &a = mesh.vertex(e[0]), &b = mesh.vertex(e[1]), &c = mesh.vertex(e[2]);
            const double jac = (b - a).cross(c - a);
            area += 0.5 * jac;
            for (int i = 0; i <= lattice_order; ++i)
                for (int j = 0; j <= lattice_order - i; ++j) {
                    const std::array<double, 3> l = {double(i) / lattice_order,
                                                     double(j) / lattice_order,
                                                     double(lattice_order - i - j) / lattice_order};
                    const Point2 x = a * l[0] + b * l[1] + c * l[2];
                    y_inf = std::max(y_inf, (exact.velocity(x) -
                                             eval_vec_p2(mesh, dofs, sol.velocity, t, l)).norm());
                }
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Point2& rp = rule.points[q];
                const std::array<double, 3> l = {1.0 - rp.x - rp.y, rp.x, rp.y};
                const Point2 x = a + rp.x * (b - a) + rp.y * (c - a);
                const Mat2 d = exact.velocity_gradient(x) -
                               eval_grad_vec_p2(mesh, dofs, sol.velocity, t, l);
                grad_sq += rule.weights[q] * jac *
                           (d.a00 * d.a00 + d.a01 * d.a01 + d.a10 * d.a10 + d.a11 * d.a11);
                p_int += rule.weights[q] * jac *
                         (exact.pressure(x) - eval_scalar_p1(mesh, dofs, sol.pressure, t, l));
            }
        }
        const double p_mean = p_int / area;
        double p_sq = 0.0;
        for (int t = 0; t < mesh.num_elements(); ++t) {
            const auto& e = mesh.element(t);
            const Point2 &a = mesh.vertex(e[0]), &b = mesh.vertex(e[1]), &c = mesh.vertex(e[2]);
            const double jac = (b - a).cross(c - a);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Point2& rp = rule.points[q];
                const std::array<double, 3> l = {1.0 - rp.x - rp.y, rp.x, rp.y};
                const Point2 x = a + rp.x * (b - a) + rp.y * (c - a);
                const double d =
                    exact.pressure(x) - eval_scalar_p1(mesh, dofs, sol.pressure, t, l) - p_mean;
                p_sq += rule.weights[q] * jac * d * d;
            }
        }

        RunRow row;
        row.iter = iter;
        row.ndof = count_ndof(dofs);
        row.nelem = mesh.num_elements();
        row.est_st_energy = e_energy.global;
        row.est_st_max = e_max.global;
        row.est_ocp = e_energy.global;  // drives the refinement
        row.has_error = true;
        row.err_y_inf = y_inf;
        row.err_p_l2 = std::sqrt(p_sq);
        row.err_z_w = std::sqrt(grad_sq);  // energy seminorm of the velocity error
        row.err_total = std::sqrt(grad_sq + p_sq);
        row.effectivity = effectivity(e_energy.global, row.err_total);
        row.ell = mesh.metrics({}).ell;
        row.wall_s = seconds_since(t0);
        rec.rows.push_back(row);
        writer.row(row);

        if (row.ndof >= max_ndof || iter + 1 == max_iterations) break;
        std::vector<double> sq(e_energy.local.size());
        for (std::size_t t = 0; t < sq.size(); ++t) sq[t] = e_energy.local[t] * e_energy.local[t];
        mesh = mesh.bisect(mark_indicators(sq, theta));
    }
    return rec;
}

RunRecord run_delta(double alpha, const Point2& point, const Vec2& force, int max_iterations,
                    long max_ndof, double theta, const std::string& out_dir) {
    // exact pair in the -lap z + grad r = F delta convention
    auto z_exact = [point, force](const Point2& x) { return stokeslet(point, x).velocity * force; };
    auto z_grad = [point, force](const Point2& x) {
        return stokeslet_velocity_gradient(point, x, force);
    };
    auto r_exact = [point, force](const Point2& x) {
        return -stokeslet(point, x).pressure.dot(force);
    };

    Mesh mesh = initial_mesh(Domain::unit_square);
    RecordWriter writer(out_dir, false);
    RunRecord rec;
    for (int iter = 0; iter < max_iterations; ++iter) {
        const auto t0 = Clock::now();
        const DofMap dofs = build_dofs(mesh);
        SaddleSystem sys = assemble(mesh, dofs);
        LoadSpec load;
        load.diracs.push_back({point, force});
        sys.rhs_velocity = assemble_load(load, mesh, dofs);
        apply_dirichlet(sys, dofs, z_exact);
        const StokesSolution sol = solve_saddle(sys);

        const WeightRho weight({point}, alpha, mesh);
        // the indicators expect the adjoint-convention pressure, hence -r
        FeFunction r_flip = sol.pressure;
        for (double& v : r_flip.coeffs) v = -v;
        const std::vector<PointLoad> loads = {{point, force}};
        const LocalGlobal e_alpha =
            est_adjoint(mesh, dofs, sol.velocity, r_flip, loads, weight, 6);

        // weighted errors against the fundamental solution
        const int grading_depth = 30;
        double rho_int = 0.0, r_diff_int = 0.0;
        const int nt = mesh.num_elements();
        std::vector<std::optional<Point2>> center(nt);
        for (int t = 0; t < nt; ++t)
            if (mesh.contains(t, point)) center[t] = point;
        auto cell = [&](int t) {
            const auto& e = mesh.element(t);
            return std::array<Point2, 3>{mesh.vertex(e[0]), mesh.vertex(e[1]), mesh.vertex(e[2])};
        };
        for (int t = 0; t < nt; ++t) {
            const auto v = cell(t);
            rho_int += integrate_weighted([&](const Point2& x) { return weight(x); }, center[t],
                                          alpha, v[0], v[1], v[2], grading_depth);
            r_diff_int += integrate_weighted(
                [&](const Point2& x) {
                    const auto l = mesh.barycentric(t, x);
                    return weight(x) *
                           (r_exact(x) - eval_scalar_p1(mesh, dofs, sol.pressure, t, l));
                },
                center[t], alpha, v[0], v[1], v[2], grading_depth);
        }
        const double r_mean = r_diff_int / rho_int;
        double z_sq = 0.0, r_sq = 0.0;
        for (int t = 0; t < nt; ++t) {
            const auto v = cell(t);
            z_sq += integrate_weighted(
                [&](const Point2& x) {
                    const auto l = mesh.barycentric(t, x);
                    const Mat2 d = z_grad(x) - eval_grad_vec_p2(mesh, dofs, sol.velocity, t, l);
                    return weight(x) *
                           (d.a00 * d.a00 + d.a01 * d.a01 + d.a10 * d.a10 + d.a11 * d.a11);
                },
                center[t], alpha, v[0], v[1], v[2], grading_depth);
            r_sq += integrate_weighted(
                [&](const Point2& x) {
                    const auto l = mesh.barycentric(t, x);
                    const double d =
                        r_exact(x) - eval_scalar_p1(mesh, dofs, sol.pressure, t, l) - r_mean;
                    return weight(x) * d * d;
                },
                center[t], alpha, v[0], v[1], v[2], grading_depth);
        }

        RunRow row;
        row.iter = iter;
        row.ndof = count_ndof(dofs);
        row.nelem = mesh.num_elements();
        row.est_ad = e_alpha.global;
        row.est_ocp = e_alpha.global;  // drives the refinement
        row.has_error = true;
        row.err_z_w = std::sqrt(z_sq);
        row.err_r_w = std::sqrt(r_sq);
        row.err_total = row.err_z_w + row.err_r_w;
        row.effectivity = effectivity(e_alpha.global, row.err_total);
        row.ell = mesh.metrics({point}).ell;
        row.wall_s = seconds_since(t0);
        rec.rows.push_back(row);
        writer.row(row);

        if (row.ndof >= max_ndof || iter + 1 == max_iterations) break;
        std::vector<double> sq(e_alpha.local.size());
        for (std::size_t t = 0; t < sq.size(); ++t) sq[t] = e_alpha.local[t] * e_alpha.local[t];
        mesh = mesh.bisect(mark_indicators(sq, theta));
    }
    return rec;
}

void write_record_csv(std::ostream& out, const RunRecord& rec) {
    out << "iter,ndof,nelem,est_ocp,est_st_max,est_st_energy,est_ad,est_ct,err_total,"
           "err_y_inf,err_p_l2,err_z_w,err_r_w,err_u_l2,effectivity,ell_T,pdas_iters,wall_s\n";
    for (const RunRow& r : rec.rows) write_row(out, r);
}

}  // namespace safem
