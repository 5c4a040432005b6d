#include "hshock/errors.hpp"
#include "hshock/estimation.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

namespace hshock {

namespace {

double transform(Yen cost, bool log_transform) {
    const auto c = static_cast<double>(cost);
    return log_transform ? std::log1p(c) : c;
}

} // namespace

ARDesign build_ar_design(const Panel &panel, int age, int order, bool log_transform) {
    if (order != 1 && order != 2)
        throw Error(ErrorKind::InvalidArgument, "autoregression order must be 1 or 2");

    struct Row {
        int year;
        double y;
        double lags[2];
    };
    std::vector<Row> rows;
    for (const auto &t : panel.trajectories()) {
        const auto *e = t.at_age(age);
        if (e == nullptr || age - order < t.first_age || !e->observed())
            continue;
        bool complete = true;
        for (int k = 1; k <= order && complete; ++k)
            complete = (e - k)->observed();
        if (!complete)
            continue;
        Row r{t.first_year + (age - t.first_age), transform(e->annual_cost, log_transform), {0.0, 0.0}};
        for (int k = 1; k <= order; ++k)
            r.lags[k - 1] = transform((e - k)->annual_cost, log_transform);
        rows.push_back(r);
    }

    ARDesign d;
    std::vector<int> years;
    for (const auto &r : rows)
        years.push_back(r.year);
    std::sort(years.begin(), years.end());
    years.erase(std::unique(years.begin(), years.end()), years.end());
    if (!years.empty()) {
        d.base_year = years.front();
        d.dummy_years.assign(years.begin() + 1, years.end());
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(1 + order + static_cast<int>(d.dummy_years.size()));
    d.x = Eigen::MatrixXd::Zero(n, p);
    d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto &r = rows[static_cast<std::size_t>(i)];
        d.y(i) = r.y;
        d.x(i, 0) = 1.0;
        for (int k = 0; k < order; ++k)
            d.x(i, 1 + k) = r.lags[k];
        if (r.year != d.base_year) {
            const auto it = std::lower_bound(d.dummy_years.begin(), d.dummy_years.end(), r.year);
            d.x(i, 1 + order + (it - d.dummy_years.begin())) = 1.0;
        }
    }
    return d;
}

ARFit ar_regression(const Panel &panel, int age, int order, bool log_transform) {
    const ARDesign d = build_ar_design(panel, age, order, log_transform);
    ARFit fit;
    fit.age = age;
    fit.order = order;
    fit.log_transform = log_transform;
    fit.n = static_cast<std::size_t>(d.y.size());
    fit.base_year = d.base_year;

    const auto p = d.x.cols();
    if (d.x.rows() < p + 1)
        return fit;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x);
    if (qr.rank() < p)
        throw Error(ErrorKind::DegenerateFit,
                    "autoregression design at age " + std::to_string(age) + " is rank deficient");
    const Eigen::VectorXd beta = qr.solve(d.y);
    const Eigen::VectorXd resid = d.y - d.x * beta;
    fit.degrees_of_freedom = static_cast<int>(d.x.rows() - p);
    fit.residual_variance = resid.squaredNorm() / fit.degrees_of_freedom;

    const Eigen::MatrixXd xtx_inv =
        (d.x.transpose() * d.x).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    auto se = [&](Eigen::Index k) { return std::sqrt(std::max(0.0, fit.residual_variance * xtx_inv(k, k))); };

    fit.available = true;
    fit.intercept = beta(0);
    fit.intercept_se = se(0);
    for (int k = 0; k < order; ++k) {
        fit.lag_coefficients.push_back(beta(1 + k));
        fit.lag_std_errors.push_back(se(1 + k));
    }
    for (std::size_t k = 0; k < d.dummy_years.size(); ++k)
        fit.year_effects.emplace_back(d.dummy_years[k], beta(1 + order + static_cast<Eigen::Index>(k)));
    return fit;
}

std::pair<double, double> ARFit::lag_interval(int k, double level) const {
    if (!available || k < 1 || k > order)
        throw Error(ErrorKind::Unavailable, "no such lag coefficient");
    const boost::math::students_t dist(static_cast<double>(degrees_of_freedom));
    const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0));
    const auto i = static_cast<std::size_t>(k - 1);
    return {lag_coefficients[i] - t * lag_std_errors[i], lag_coefficients[i] + t * lag_std_errors[i]};
}

} // namespace hshock
