#ifndef TPPI_REGRESS_HPP
#define TPPI_REGRESS_HPP

#include <Eigen/Core>
#include <compare>
#include <optional>
#include <span>
#include <vector>

#include "tppi/series.hpp"

namespace tppi::regress {

/// Lag depth of a pure autoregressive model: the value for year t is
/// regressed on the l values for years t-1 .. t-l. No intercept.
struct ArConfig {
    int lags = 1;
};

/// Lag structure of an autoregressive model with an exogenous input.
/// Endogenous lags as in ArConfig; the exogenous series enters with
/// exo_lags consecutive values starting at delay exo_delay, i.e. years
/// t-exo_delay .. t-exo_delay-exo_lags+1.
struct ArxConfig {
    int endo_lags = 1;
    int exo_delay = 1;
    int exo_lags = 1;

    auto operator<=>(const ArxConfig&) const = default;
};

/// Lag-embedded regression problem. Row r predicts target_years[r]:
/// the target holds the series value for that year, the matrix row holds
/// the lagged regressors for it. Rows are ordered by ascending target year.
struct DesignMatrix {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd target;
    std::vector<int> target_years;
};

/// Row for target year t: [x_{t-1}, ..., x_{t-l}].
/// Throws SeriesTooShort when the series has no usable sample row.
DesignMatrix build_ar_design(const Series& series, const ArConfig& cfg);

/// Row for target year t: [x_{t-1}, ..., x_{t-l}, y_{t-u}, ..., y_{t-u-v+1}].
/// Both series are first clipped to their common year range; only years whose
/// every required lag falls inside that range produce rows.
/// Throws YearMisalignment when the series share no years, SeriesTooShort
/// when the shared range admits no sample row.
DesignMatrix build_arx_design(const Series& endo, const Series& exo, const ArxConfig& cfg);

/// Drops rows whose target year precedes `first_target_year` (window
/// alignment across lag depths). Throws SeriesTooShort if nothing remains.
DesignMatrix drop_targets_before(DesignMatrix design, int first_target_year);

/// Minimum-norm least-squares solution. Singular values below 1e-10 times
/// the largest are treated as zero, so rank-deficient and underdetermined
/// systems solve deterministically.
Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& target);

/// A fitted AR or ARX model together with its in-sample diagnostics.
/// Coefficients are stored in prediction form: the model evaluates as
///   x_t = sum_i endo_coeffs[i-1] * x_{t-i} + sum_j exo_coeffs[j-1] * y_{t-u-j+1}.
struct RegressionFit {
    Eigen::VectorXd endo_coeffs;
    Eigen::VectorXd exo_coeffs;  // empty for pure AR
    Eigen::VectorXd fitted;      // aligned to target_years
    Eigen::VectorXd residuals;   // actual - fitted
    std::vector<int> target_years;
    int n_samples = 0;
    int n_params = 0;
};

/// Solves a prepared design. The first n_endo columns are endogenous lags,
/// the next n_exo columns exogenous ones.
RegressionFit fit_design(const DesignMatrix& design, int n_endo, int n_exo);

RegressionFit fit_ar(const Series& series, const ArConfig& cfg);
RegressionFit fit_arx(const Series& endo, const Series& exo, const ArxConfig& cfg);

/// One-step-ahead forecast for the year after endo_history ends.
/// Histories must supply every lag the fit requires; SeriesTooShort otherwise.
double predict_next(const RegressionFit& fit, const Series& endo_history, const ArConfig& cfg);
double predict_next(const RegressionFit& fit, const Series& endo_history,
                    const Series& exo_history, const ArxConfig& cfg);

/// Coefficient of determination, or explicitly undefined when the actual
/// values have (numerically) zero variance about their mean.
class RSquared {
public:
    static RSquared undefined() { return RSquared(); }
    static RSquared of(double v) {
        RSquared r;
        r.value_ = v;
        return r;
    }

    bool defined() const { return value_.has_value(); }

    /// Throws std::logic_error when undefined.
    double value() const;

private:
    RSquared() = default;
    std::optional<double> value_;
};

/// 1 - SS_res/SS_tot with SS_tot about the mean of `actual`. Not clamped;
/// may be negative. Exactly 1.0 when SS_res <= 1e-12 * SS_tot; undefined
/// when SS_tot < 1e-12. Throws LengthMismatch on unequal or empty inputs.
RSquared r_squared(std::span<const double> actual, std::span<const double> predicted);

}  // namespace tppi::regress

#endif  // TPPI_REGRESS_HPP
