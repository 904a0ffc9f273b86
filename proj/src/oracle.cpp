#include "syncslam/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace syncslam {

ScenarioConfig corridor_scenario() {
    ScenarioConfig cfg;
    cfg.walls.clear();
    cfg.base_stations = {{1, {0.0, 2.0}, 0.0}};
    cfg.mts = {{{-3.0, 0.0}, 0.0, 0.2, {}}};
    cfg.n_steps = 20;
    cfg.dt = 1.0;
    cfg.seed = 1;

    cfg.truth.bias_walk_sigma_bs = 0.0;
    cfg.truth.bias_walk_sigma_mt = 0.0;
    cfg.noise.snr_ref_db = 20.0;
    cfg.noise.p_d = 0.9;
    cfg.noise.mu_fp = 1.0;

    EngineConfig& e = cfg.engine;
    e.p_d = 0.9;
    e.mu_fp = 1.0;
    e.mu_n = 0.0;
    e.accel_sigma = 0.0;
    e.orientation_sigma = 0.0;
    e.bias_sigma_mt = 0.0;
    e.bias_sigma_bs = 0.0;
    e.prior_pos_sigma_x = 1.0;
    e.prior_pos_sigma_y = 0.0;
    e.prior_vel_sigma = 0.0;
    e.prior_orientation_sigma = 0.0;
    e.bias_prior = BiasPriorMode::kTruth;
    e.jitter_orientation = false;
    e.jitter_bias = false;
    return cfg;
}

namespace {

// Kept apart from the geometry and synth modules on purpose: the oracle recomputes
// angles, apertures and standard deviations from first principles.
double wrap(double a) {
    const double two_pi = 2.0 * M_PI;
    a = std::fmod(a + M_PI, two_pi);
    if (a < 0.0) a += two_pi;
    return a - M_PI;
}

double aperture(double angle, const ArrayConfig& arr, double floor) {
    const double h = static_cast<double>(arr.elements);
    const double s = std::sin(angle);
    return std::max(arr.spacing * arr.spacing * s * s * (h * h - 1.0) / 12.0, floor);
}

double gauss(double r, double var) { return std::exp(-0.5 * r * r / var) / std::sqrt(2.0 * M_PI * var); }

}  // namespace

GridPosterior corridor_grid_filter(const ScenarioConfig& cfg_in, const GroundTruth& truth, const MeasurementLog& z,
                                   std::size_t grid_points) {
    const ScenarioConfig cfg = resolve(cfg_in);
    if (cfg.base_stations.size() != 1 || cfg.mts.size() != 1 || !cfg.walls.empty())
        throw std::invalid_argument("corridor oracle: needs one BS, one MT and no walls");
    if (grid_points < 3) throw std::invalid_argument("corridor oracle: grid too small");
    const NoiseConfig& nc = cfg.noise;
    const EngineConfig& e = cfg.engine;
    const double c_light = 299792458.0;
    const double fp = 1.0 / (nc.d_max * 4.0 * M_PI * M_PI);
    const double bx = cfg.base_stations[0].position.x();
    const double by = cfg.base_stations[0].position.y();

    const MtState& x0 = truth.mt[0][0];
    const double sigma0 = e.prior_pos_sigma_x;
    GridPosterior out;
    out.grid.resize(grid_points);
    std::vector<double> logp(grid_points);
    for (std::size_t g = 0; g < grid_points; ++g) {
        const double x = x0.position.x() - 8.0 * sigma0 + 16.0 * sigma0 * static_cast<double>(g) / (grid_points - 1);
        out.grid[g] = x;
        const double e0 = (x - x0.position.x()) / sigma0;
        logp[g] = -0.5 * e0 * e0;
    }

    for (std::size_t n = 1; n <= cfg.n_steps && n < z.size(); ++n) {
        const MtState& xt = truth.mt[n][0];
        const double shift = xt.position.x() - x0.position.x();
        const double y = xt.position.y();
        const double o = xt.orientation;
        const double b_mt = xt.bias;
        const double b_bs = truth.bs_bias[n][0];
        const auto& zs = z[n][0];
        for (std::size_t g = 0; g < grid_points; ++g) {
            const double px = out.grid[g] + shift;
            const double dx = bx - px, dy = by - y;
            const double d = std::sqrt(dx * dx + dy * dy);
            const double a = std::atan2(dy, dx);
            double lik = 1.0 - e.p_d;
            for (const Measurement& m : zs) {
                const double k = 8.0 * M_PI * M_PI * m.z_u * m.z_u;
                const double var_d = c_light * c_light / (k * nc.beta_bw * nc.beta_bw);
                const double var_phi = 1.0 / (k * aperture(m.z_phi, nc.array_mt, nc.d2_floor));
                const double var_theta = 1.0 / (k * aperture(m.z_theta, nc.array_bs, nc.d2_floor));
                const double r_d = m.z_d - (d - (b_mt - b_bs));
                const double r_phi = wrap(m.z_phi - (a - o));
                const double r_theta = wrap(m.z_theta - (a + M_PI));
                lik += e.p_d * gauss(r_d, var_d) * gauss(r_phi, var_phi) * gauss(r_theta, var_theta) / (e.mu_fp * fp);
            }
            logp[g] += std::log(std::max(lik, 1e-300));
        }
        const double top = *std::max_element(logp.begin(), logp.end());
        double s = 0.0, m1 = 0.0, m2 = 0.0;
        for (std::size_t g = 0; g < grid_points; ++g) {
            const double w = std::exp(logp[g] - top);
            const double x = out.grid[g] + shift;
            s += w;
            m1 += w * x;
            m2 += w * x * x;
        }
        const double mean = m1 / s;
        out.mean.push_back(mean);
        out.stddev.push_back(std::sqrt(std::max(m2 / s - mean * mean, 0.0)));
    }
    return out;
}

}  // namespace syncslam
