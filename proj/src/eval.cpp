#include "syncslam/eval.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace syncslam {

double bias_difference_rmse(const std::vector<double>& est_bs, const std::vector<double>& est_mt,
                            const std::vector<double>& true_bs, const std::vector<double>& true_mt) {
    if (est_bs.size() != true_bs.size() || est_mt.size() != true_mt.size())
        throw std::invalid_argument("bias_difference_rmse: size mismatch");
    const std::size_t pairs = est_bs.size() * est_mt.size();
    if (pairs == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < est_bs.size(); ++j) {
        for (std::size_t i = 0; i < est_mt.size(); ++i) {
            const double e = (est_bs[j] - est_mt[i]) - (true_bs[j] - true_mt[i]);
            acc += e * e;
        }
    }
    return std::sqrt(acc / static_cast<double>(pairs));
}

std::vector<std::size_t> hungarian(const Eigen::MatrixXd& cost) {
    const std::size_t n = static_cast<std::size_t>(cost.rows());
    const std::size_t m = static_cast<std::size_t>(cost.cols());
    if (n > m) throw std::invalid_argument("hungarian: needs rows <= cols");
    if (n == 0) return {};
    const double inf = std::numeric_limits<double>::infinity();
    // potentials and matching, 1-based with column 0 as the virtual start
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assign(n, 0);
    for (std::size_t j = 1; j <= m; ++j)
        if (p[j] != 0) assign[p[j] - 1] = j - 1;
    return assign;
}

OspaResult ospa(const std::vector<Vec2>& estimates, const std::vector<Vec2>& truth, double c, double p) {
    if (!(c > 0.0) || !(p >= 1.0)) throw std::invalid_argument("ospa: need c > 0 and p >= 1");
    OspaResult out;
    const std::size_t ne = estimates.size();
    const std::size_t nt = truth.size();
    if (ne == 0 && nt == 0) return out;
    if (ne == 0 || nt == 0) {
        out.total = out.cardinality = c;
        return out;
    }
    const bool est_rows = ne <= nt;
    const std::size_t small = est_rows ? ne : nt;
    const std::size_t big = est_rows ? nt : ne;
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(small), static_cast<Eigen::Index>(big));
    for (std::size_t a = 0; a < small; ++a) {
        for (std::size_t b = 0; b < big; ++b) {
            const Vec2& e = est_rows ? estimates[a] : estimates[b];
            const Vec2& t = est_rows ? truth[b] : truth[a];
            cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = std::pow(std::min((e - t).norm(), c), p);
        }
    }
    const std::vector<std::size_t> assign = hungarian(cost);
    double loc = 0.0;
    for (std::size_t a = 0; a < small; ++a) {
        const double cst = cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(assign[a]));
        loc += cst;
        const std::size_t ei = est_rows ? a : assign[a];
        const std::size_t ti = est_rows ? assign[a] : a;
        if ((estimates[ei] - truth[ti]).norm() < c) out.matches.emplace_back(ei, ti);
    }
    const double card = std::pow(c, p) * static_cast<double>(big - small);
    const double nb = static_cast<double>(big);
    out.total = std::pow((loc + card) / nb, 1.0 / p);
    out.localization = std::pow(loc / nb, 1.0 / p);
    out.cardinality = std::pow(card / nb, 1.0 / p);
    return out;
}

SeparationResult separation_accuracy(const std::vector<std::pair<std::size_t, std::size_t>>& matches,
                                     const std::vector<std::size_t>& est_bs, const std::vector<std::size_t>& true_bs) {
    SeparationResult out;
    for (const auto& [e, t] : matches) {
        if (e >= est_bs.size() || t >= true_bs.size()) throw std::out_of_range("separation_accuracy: bad match index");
        ++out.matched;
        if (est_bs[e] == true_bs[t]) ++out.correct;
    }
    out.accuracy = out.matched ? static_cast<double>(out.correct) / static_cast<double>(out.matched)
                               : std::numeric_limits<double>::quiet_NaN();
    return out;
}

StepMetrics evaluate_step(const Estimates& est, const GroundTruth& truth, const EvalConfig& cfg) {
    if (est.step >= truth.mt.size()) throw std::out_of_range("evaluate_step: step beyond ground truth");
    const auto& mts = truth.mt[est.step];
    if (est.mts.size() != mts.size()) throw std::invalid_argument("evaluate_step: MT count mismatch");
    StepMetrics s;
    s.step = est.step;
    double pos = 0.0, ori = 0.0;
    std::vector<double> est_mt, true_mt;
    for (std::size_t i = 0; i < mts.size(); ++i) {
        pos += (est.mts[i].position - mts[i].position).squaredNorm();
        const double de = wrap_angle(est.mts[i].orientation - mts[i].orientation);
        ori += de * de;
        est_mt.push_back(est.mts[i].bias);
        true_mt.push_back(mts[i].bias);
    }
    const double ni = static_cast<double>(std::max<std::size_t>(1, mts.size()));
    s.position_rmse = std::sqrt(pos / ni);
    s.orientation_rmse = std::sqrt(ori / ni);
    s.bias_difference_rmse = bias_difference_rmse(est.bs_bias, est_mt, truth.bs_bias[est.step], true_mt);

    std::vector<Vec2> ep, tp;
    std::vector<std::size_t> eb, tb;
    for (const PvaEstimate& p : est.confirmed) {
        ep.push_back(p.position);
        eb.push_back(p.bs_index);
    }
    for (const VirtualAnchor& va : truth.vas) {
        tp.push_back(va.position);
        tb.push_back(va.bs_id);
    }
    const OspaResult o = ospa(ep, tp, cfg.ospa_c, cfg.ospa_p);
    s.ospa = o.total;
    s.ospa_localization = o.localization;
    s.ospa_cardinality = o.cardinality;
    const SeparationResult sep = separation_accuracy(o.matches, eb, tb);
    s.separation = sep.accuracy;
    s.matched = sep.matched;
    s.correct = sep.correct;
    s.confirmed = est.confirmed.size();
    s.hypotheses = est.hypotheses;
    return s;
}

MetricsReport evaluate(const std::vector<Estimates>& est, const GroundTruth& truth, const EvalConfig& cfg) {
    MetricsReport r;
    for (const Estimates& e : est) r.steps.push_back(evaluate_step(e, truth, cfg));
    return r;
}

MetricsSummary summarize(const MetricsReport& report, std::size_t window) {
    MetricsSummary s;
    const std::size_t n = report.steps.size();
    const std::size_t first = n > window ? n - window : 0;
    const double count = static_cast<double>(n - first);
    if (count == 0) return s;
    std::size_t correct = 0;
    for (std::size_t k = first; k < n; ++k) {
        const StepMetrics& m = report.steps[k];
        s.position_rmse += m.position_rmse * m.position_rmse;
        s.bias_difference_rmse += m.bias_difference_rmse * m.bias_difference_rmse;
        s.ospa += m.ospa;
        s.matched += m.matched;
        correct += m.correct;
    }
    s.position_rmse = std::sqrt(s.position_rmse / count);
    s.bias_difference_rmse = std::sqrt(s.bias_difference_rmse / count);
    s.ospa /= count;
    s.separation = s.matched ? static_cast<double>(correct) / static_cast<double>(s.matched)
                             : std::numeric_limits<double>::quiet_NaN();
    return s;
}

const char* const kMetricsCsvHeader =
    "step,position_rmse,orientation_rmse,bias_difference_rmse,ospa,ospa_localization,ospa_cardinality,"
    "separation_accuracy,matched,correct,confirmed,hypotheses";

std::string metrics_csv(const MetricsReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << kMetricsCsvHeader << '\n';
    for (const StepMetrics& m : report.steps) {
        os << m.step << ',' << m.position_rmse << ',' << m.orientation_rmse << ',' << m.bias_difference_rmse << ','
           << m.ospa << ',' << m.ospa_localization << ',' << m.ospa_cardinality << ',';
        if (std::isnan(m.separation))
            os << "nan";
        else
            os << m.separation;
        os << ',' << m.matched << ',' << m.correct << ',' << m.confirmed << ',' << m.hypotheses << '\n';
    }
    return os.str();
}

}  // namespace syncslam
