#include "tppi/regress.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <stdexcept>
#include <string>

#include "tppi/errors.hpp"

namespace tppi::regress {

namespace {

constexpr double kRankThreshold = 1e-10;   // relative singular-value cutoff
constexpr double kExactFitRelTol = 1e-12;  // SS_res below this fraction of SS_tot counts as exact

void require_positive(int value, const char* name) {
    if (value < 1) {
        throw std::invalid_argument(std::string(name) + " must be >= 1, got " +
                                    std::to_string(value));
    }
}

}  // namespace

DesignMatrix build_ar_design(const Series& series, const ArConfig& cfg) {
    require_positive(cfg.lags, "ArConfig.lags");
    const int l = cfg.lags;
    const int n = static_cast<int>(series.size());
    if (n <= l) {
        throw SeriesTooShort("AR(" + std::to_string(l) + ") needs at least " +
                             std::to_string(l + 1) + " values, series has " + std::to_string(n));
    }

    const int rows = n - l;
    DesignMatrix d;
    d.matrix.resize(rows, l);
    d.target.resize(rows);
    d.target_years.reserve(rows);
    for (int r = 0; r < rows; ++r) {
        const int t = series.start_year() + l + r;
        d.target(r) = series.at_year(t);
        for (int j = 1; j <= l; ++j) {
            d.matrix(r, j - 1) = series.at_year(t - j);
        }
        d.target_years.push_back(t);
    }
    return d;
}

DesignMatrix build_arx_design(const Series& endo, const Series& exo, const ArxConfig& cfg) {
    require_positive(cfg.endo_lags, "ArxConfig.endo_lags");
    require_positive(cfg.exo_delay, "ArxConfig.exo_delay");
    require_positive(cfg.exo_lags, "ArxConfig.exo_lags");

    const int lo = std::max(endo.start_year(), exo.start_year());
    const int hi = std::min(endo.end_year(), exo.end_year());
    if (lo > hi) {
        throw YearMisalignment("series share no years: " + std::to_string(endo.start_year()) +
                               ".." + std::to_string(endo.end_year()) + " vs " +
                               std::to_string(exo.start_year()) + ".." +
                               std::to_string(exo.end_year()));
    }

    const int l = cfg.endo_lags;
    const int u = cfg.exo_delay;
    const int v = cfg.exo_lags;

    // Every lag must fall inside the shared range, so the earliest target
    // year is bounded by the deeper of the two lag reaches.
    const int first_t = lo + std::max(l, u + v - 1);
    const int last_t = hi;
    if (first_t > last_t) {
        throw SeriesTooShort("overlap " + std::to_string(lo) + ".." + std::to_string(hi) +
                             " admits no sample row for <l=" + std::to_string(l) +
                             ",u=" + std::to_string(u) + ",v=" + std::to_string(v) + ">");
    }

    const int rows = last_t - first_t + 1;
    DesignMatrix d;
    d.matrix.resize(rows, l + v);
    d.target.resize(rows);
    d.target_years.reserve(rows);
    for (int r = 0; r < rows; ++r) {
        const int t = first_t + r;
        d.target(r) = endo.at_year(t);
        for (int j = 1; j <= l; ++j) {
            d.matrix(r, j - 1) = endo.at_year(t - j);
        }
        for (int j = 1; j <= v; ++j) {
            d.matrix(r, l + j - 1) = exo.at_year(t - u - j + 1);
        }
        d.target_years.push_back(t);
    }
    return d;
}

DesignMatrix drop_targets_before(DesignMatrix design, int first_target_year) {
    const auto& years = design.target_years;
    auto it = std::lower_bound(years.begin(), years.end(), first_target_year);
    const auto skip = static_cast<Eigen::Index>(it - years.begin());
    if (skip == 0) return design;
    const auto keep = static_cast<Eigen::Index>(years.size()) - skip;
    if (keep <= 0) {
        throw SeriesTooShort("no sample rows remain at or after target year " +
                             std::to_string(first_target_year));
    }
    DesignMatrix out;
    out.matrix = design.matrix.bottomRows(keep);
    out.target = design.target.tail(keep);
    out.target_years.assign(years.end() - keep, years.end());
    return out;
}

Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& target) {
    if (matrix.rows() < 1 || matrix.cols() < 1) {
        throw std::invalid_argument("least-squares matrix must have at least one row and column");
    }
    if (matrix.rows() != target.size()) {
        throw std::invalid_argument("matrix rows (" + std::to_string(matrix.rows()) +
                                    ") do not match target length (" +
                                    std::to_string(target.size()) + ")");
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kRankThreshold);
    return svd.solve(target);
}

RegressionFit fit_design(const DesignMatrix& design, int n_endo, int n_exo) {
    if (n_endo < 0 || n_exo < 0 || design.matrix.cols() != n_endo + n_exo) {
        throw std::invalid_argument("design has " + std::to_string(design.matrix.cols()) +
                                    " columns, expected " + std::to_string(n_endo) + "+" +
                                    std::to_string(n_exo));
    }
    const Eigen::VectorXd coeffs = solve_least_squares(design.matrix, design.target);

    RegressionFit fit;
    fit.endo_coeffs = coeffs.head(n_endo);
    fit.exo_coeffs = coeffs.tail(n_exo);
    fit.fitted = design.matrix * coeffs;
    fit.residuals = design.target - fit.fitted;
    fit.target_years = design.target_years;
    fit.n_samples = static_cast<int>(design.matrix.rows());
    fit.n_params = n_endo + n_exo;
    return fit;
}

RegressionFit fit_ar(const Series& series, const ArConfig& cfg) {
    return fit_design(build_ar_design(series, cfg), cfg.lags, 0);
}

RegressionFit fit_arx(const Series& endo, const Series& exo, const ArxConfig& cfg) {
    return fit_design(build_arx_design(endo, exo, cfg), cfg.endo_lags, cfg.exo_lags);
}

double predict_next(const RegressionFit& fit, const Series& endo_history, const ArConfig& cfg) {
    require_positive(cfg.lags, "ArConfig.lags");
    if (fit.endo_coeffs.size() != cfg.lags || fit.exo_coeffs.size() != 0) {
        throw std::invalid_argument("fit shape does not match AR(" + std::to_string(cfg.lags) +
                                    ")");
    }
    const int t = endo_history.end_year() + 1;
    if (!endo_history.covers(t - cfg.lags)) {
        throw SeriesTooShort("history ending " + std::to_string(endo_history.end_year()) +
                             " lacks lag year " + std::to_string(t - cfg.lags));
    }
    double sum = 0.0;
    for (int j = 1; j <= cfg.lags; ++j) {
        sum += fit.endo_coeffs(j - 1) * endo_history.at_year(t - j);
    }
    return sum;
}

double predict_next(const RegressionFit& fit, const Series& endo_history,
                    const Series& exo_history, const ArxConfig& cfg) {
    require_positive(cfg.endo_lags, "ArxConfig.endo_lags");
    require_positive(cfg.exo_delay, "ArxConfig.exo_delay");
    require_positive(cfg.exo_lags, "ArxConfig.exo_lags");
    if (fit.endo_coeffs.size() != cfg.endo_lags || fit.exo_coeffs.size() != cfg.exo_lags) {
        throw std::invalid_argument("fit shape does not match <l=" +
                                    std::to_string(cfg.endo_lags) + ",u=" +
                                    std::to_string(cfg.exo_delay) + ",v=" +
                                    std::to_string(cfg.exo_lags) + ">");
    }
    const int t = endo_history.end_year() + 1;
    if (!endo_history.covers(t - cfg.endo_lags)) {
        throw SeriesTooShort("endogenous history lacks lag year " +
                             std::to_string(t - cfg.endo_lags));
    }
    const int exo_newest = t - cfg.exo_delay;
    const int exo_oldest = t - cfg.exo_delay - cfg.exo_lags + 1;
    if (!exo_history.covers(exo_newest) || !exo_history.covers(exo_oldest)) {
        throw SeriesTooShort("exogenous history does not cover years " +
                             std::to_string(exo_oldest) + ".." + std::to_string(exo_newest));
    }
    double sum = 0.0;
    for (int j = 1; j <= cfg.endo_lags; ++j) {
        sum += fit.endo_coeffs(j - 1) * endo_history.at_year(t - j);
    }
    for (int j = 1; j <= cfg.exo_lags; ++j) {
        sum += fit.exo_coeffs(j - 1) * exo_history.at_year(t - cfg.exo_delay - j + 1);
    }
    return sum;
}

double RSquared::value() const {
    if (!value_) {
        throw std::logic_error("RSquared is undefined (zero-variance target)");
    }
    return *value_;
}

RSquared r_squared(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) {
        throw LengthMismatch("actual has " + std::to_string(actual.size()) +
                             " values, predicted has " + std::to_string(predicted.size()));
    }
    if (actual.empty()) {
        throw LengthMismatch("need at least one (actual, predicted) pair");
    }

    double mean = 0.0;
    for (double a : actual) mean += a;
    mean /= static_cast<double>(actual.size());

    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double dt = actual[i] - mean;
        const double dr = actual[i] - predicted[i];
        ss_tot += dt * dt;
        ss_res += dr * dr;
    }

    if (ss_tot < 1e-12) return RSquared::undefined();
    if (ss_res <= kExactFitRelTol * ss_tot) return RSquared::of(1.0);
    return RSquared::of(1.0 - ss_res / ss_tot);
}

}  // namespace tppi::regress
