#ifndef DETERRENCE_ESTIMATION_HPP
#define DETERRENCE_ESTIMATION_HPP

// Survey ingestion and the discount-rate / weighting-factor / harshness
// estimators built on it.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "distributions.hpp"
#include "errors.hpp"
#include "numeric.hpp"

namespace deterrence {

inline constexpr std::array<double, 4> kDelayTaus = {2.5, 4.0, 10.0, 20.0};
inline constexpr std::array<double, 9> kPricePoints = {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.98, 1.0};
inline constexpr double kSurveyFine = 500.0;
inline constexpr double kReferenceDetention = 2.0;  // hours of immediate imprisonment in the delay questions

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DelayAnswer {
    double tau = 0.0;
    double t = 0.0;  // +inf: no delay makes tau acceptable
};

struct FineAnswer {
    double p = 0.0;
    double B = 0.0;
};

struct SurveyResponse {
    std::string respondent_id;
    double salary = 0.0;
    std::vector<DelayAnswer> delay_answers;
    std::vector<FineAnswer> fine_answers;
    std::optional<double> detention_hours;

    // Throws DomainError naming the violated rule.
    void validate() const {
        detail::require(std::isfinite(salary) && salary > 0.0, "salary must be a positive number");
        detail::require(delay_answers.size() <= kDelayTaus.size(), "too many delay answers");
        bool seen_inf = false;
        for (std::size_t j = 0; j < delay_answers.size(); ++j) {
            const auto& d = delay_answers[j];
            detail::require(d.tau == kDelayTaus[j], "delay answers must follow tau = 2.5, 4, 10, 20 in order");
            detail::require(d.t > 0.0 && !std::isnan(d.t), "delay answers must be positive or inf");
            if (seen_inf && std::isfinite(d.t))
                throw DomainError("monotone truncation: a finite delay follows an inf answer");
            seen_inf = seen_inf || std::isinf(d.t);
        }
        for (const auto& f : fine_answers) {
            detail::require(f.p > 0.0 && f.p <= 1.0, "fine-scenario p outside (0,1]");
            detail::require(std::isfinite(f.B) && f.B >= 0.0, "fine-scenario answers must be finite and >= 0");
        }
        if (detention_hours)
            detail::require(std::isfinite(*detention_hours) && *detention_hours > 0.0,
                            "detention tolerance must be a positive number");
    }
};

struct EstimateWithSE {
    double value = 0.0;
    double se = 0.0;
    std::size_t n_used = 0;
};

// ---------------------------------------------------------------- CSV

struct RowError {
    std::size_t line = 0;  // 1-based, header is line 1
    std::string message;
};

struct ParseReport {
    std::vector<SurveyResponse> responses;
    std::vector<RowError> errors;
};

inline const std::string& survey_header() {
    static const std::string h =
        "id,salary,t_2.5,t_4,t_10,t_20,B_0.05,B_0.1,B_0.25,B_0.5,B_0.75,B_0.9,B_0.95,B_0.98,B_1,detention_hours";
    return h;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline bool is_inf_token(const std::string& s) { return s == "inf" || s == "INF" || s == "Inf"; }

inline double parse_number(const std::string& s, const std::string& column) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw DomainError("column " + column + ": '" + s + "' is not a number");
    return v;
}

inline std::string format_number(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline SurveyResponse parse_row(const std::vector<std::string>& raw, const std::vector<std::string>& names) {
    std::vector<std::string> cells(raw.size());
    std::transform(raw.begin(), raw.end(), cells.begin(), trim);
    if (cells.size() != names.size())
        throw DomainError("expected " + std::to_string(names.size()) + " cells, found " + std::to_string(cells.size()));
    SurveyResponse r;
    r.respondent_id = cells[0];
    if (r.respondent_id.empty()) throw DomainError("id is empty");
    if (cells[1].empty()) throw DomainError("salary is missing");
    r.salary = parse_number(cells[1], names[1]);

    // Delay answers form a prefix: trailing cells may be blank, gaps may not.
    bool ended = false;
    for (std::size_t j = 0; j < kDelayTaus.size(); ++j) {
        const auto& c = cells[2 + j];
        if (c.empty()) {
            ended = true;
            continue;
        }
        if (ended) throw DomainError("delay answer " + names[2 + j] + " follows a blank delay answer");
        const double t = is_inf_token(c) ? std::numeric_limits<double>::infinity() : parse_number(c, names[2 + j]);
        r.delay_answers.push_back({kDelayTaus[j], t});
    }
    for (std::size_t j = 0; j < kPricePoints.size(); ++j) {
        const auto& c = cells[6 + j];
        if (c.empty()) continue;
        if (is_inf_token(c)) throw DomainError("column " + names[6 + j] + ": inf is only allowed in t columns");
        r.fine_answers.push_back({kPricePoints[j], parse_number(c, names[6 + j])});
    }
    if (!cells[15].empty()) {
        if (is_inf_token(cells[15])) throw DomainError("detention_hours: inf is only allowed in t columns");
        r.detention_hours = parse_number(cells[15], names[15]);
    }
    r.validate();
    return r;
}

}  // namespace detail

// Header mismatch throws FormatError; bad rows are collected, not dropped silently.
inline ParseReport parse_survey(std::istream& in) {
    ParseReport rep;
    std::string line;
    if (!std::getline(in, line)) return rep;
    line = detail::trim(line);
    if (line.empty()) return rep;
    if (line != survey_header()) throw FormatError("line 1: header must be '" + survey_header() + "'");
    const auto names = detail::split_csv_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        try {
            rep.responses.push_back(detail::parse_row(detail::split_csv_line(line), names));
        } catch (const DomainError& e) {
            rep.errors.push_back({lineno, e.what()});
        }
    }
    return rep;
}

inline ParseReport parse_survey_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open survey file " + path);
    return parse_survey(in);
}

inline void write_survey(std::ostream& out, std::span<const SurveyResponse> rows) {
    out << survey_header() << '\n';
    for (const auto& r : rows) {
        if (r.respondent_id.find_first_of(",\n\r") != std::string::npos)
            throw DomainError("write_survey: id contains a separator");
        out << r.respondent_id << ',' << detail::format_number(r.salary);
        for (std::size_t j = 0; j < kDelayTaus.size(); ++j) {
            out << ',';
            if (j < r.delay_answers.size()) out << detail::format_number(r.delay_answers[j].t);
        }
        for (double p : kPricePoints) {
            out << ',';
            for (const auto& f : r.fine_answers)
                if (f.p == p) out << detail::format_number(f.B);
        }
        out << ',';
        if (r.detention_hours) out << detail::format_number(*r.detention_hours);
        out << '\n';
    }
}

// ---------------------------------------------------------------- k per respondent

// Printed density of X = mean of (m-1) unit-mean normals / one unit-mean normal
// (dominant-term approximation). Goes negative below x = -1/m.
inline double ratio_normal_pdf(double x, int m, double sigma) {
    detail::require(m >= 2, "ratio_normal_pdf: m must be >= 2");
    detail::require(sigma > 0.0, "ratio_normal_pdf: sigma must be > 0");
    const double md = m;
    const double q = md - 1.0 + md * md * x * x;
    const double d = 1.0 - md + md * x;
    return md * (md - 1.0) * (1.0 + md * x) / (std::sqrt(2.0 * std::numbers::pi) * std::pow(q, 1.5) * sigma) *
           std::exp(-d * d / (2.0 * q * sigma * sigma));
}

namespace detail {

// Integral over [a, inf) split around the peak of a bump of width `width` at `centre`.
template <class F>
double integrate_peaked(F&& f, double a, double centre, double width) {
    double total = 0.0;
    const double lo = std::max(a, centre - width);
    const double hi = std::max(lo, centre + width);
    if (lo > a) total += numeric::integrate(f, a, lo, 1e-12, 1e-300).value;
    total += numeric::integrate(f, lo, hi, 1e-12, 1e-300).value;
    auto tail = [&](double u) {
        const double s = 1.0 - u;
        return f(hi + u / s) / (s * s);
    };
    total += numeric::integrate(tail, 0.0, 1.0, 1e-12, 1e-300).value;
    return total;
}

}  // namespace detail

// E[J] for m answers with error sd sigma, conditioning on X > 0 (the exact
// ratio has no finite moments near X = -1/m).
inline double expected_J(int m, double sigma) {
    detail::require(m >= 2, "expected_J: m must be >= 2");
    detail::require(sigma > 0.0, "expected_J: sigma must be > 0");
    const double md = m;
    const double centre = (md - 1.0) / md;
    const double width = 12.0 * sigma;
    auto pdf = [&](double x) { return ratio_normal_pdf(x, m, sigma); };
    auto num = [&](double x) {
        const double g = 1.0 / (1.0 / md + x);
        return pdf(x) * (g * g - 1.0);
    };
    return detail::integrate_peaked(num, 0.0, centre, width) / detail::integrate_peaked(pdf, 0.0, centre, width);
}

class SigmaTable {
public:
    static constexpr double kStep = 0.005;
    static constexpr int kNodes = 200;  // sigma = 0.005 .. 1.0

    explicit SigmaTable(int m) : m_(m) {
        detail::require(m >= 2, "SigmaTable: m must be >= 2");
        sigma_.push_back(0.0);
        root_j_.push_back(0.0);
        for (int i = 1; i <= kNodes; ++i) {
            const double s = i * kStep;
            const double j = expected_J(m, s);
            if (!(j > root_j_.back() * root_j_.back()))
                throw NonMonotoneError("SigmaTable: E[J] not strictly increasing in sigma");
            sigma_.push_back(s);
            root_j_.push_back(std::sqrt(j));
        }
    }

    int m() const { return m_; }
    double j_at_node(int i) const { return root_j_.at(i) * root_j_.at(i); }

    // Interpolates sigma linearly against sqrt(J), which is close to linear in sigma.
    // J beyond the last node clamps to sigma = 1.
    double invert(double J) const {
        detail::require(J >= 0.0, "SigmaTable::invert: J must be >= 0");
        const double x = std::sqrt(J);
        if (x >= root_j_.back()) return sigma_.back();
        const auto it = std::upper_bound(root_j_.begin(), root_j_.end(), x);
        const auto i = static_cast<std::size_t>(it - root_j_.begin());
        const double w = (x - root_j_[i - 1]) / (root_j_[i] - root_j_[i - 1]);
        return sigma_[i - 1] + w * (sigma_[i] - sigma_[i - 1]);
    }

private:
    int m_;
    std::vector<double> sigma_;
    std::vector<double> root_j_;
};

// Tables for m = 2, 3, 4 are built on first use.
inline const SigmaTable& sigma_table(int m) {
    detail::require(m >= 2 && m <= static_cast<int>(kDelayTaus.size()), "sigma_table: m must be in {2,3,4}");
    static const std::array<SigmaTable, 3> tables = {SigmaTable(2), SigmaTable(3), SigmaTable(4)};
    return tables[static_cast<std::size_t>(m - 2)];
}

struct KFit {
    EstimateWithSE k;     // n_used = m
    std::vector<double> ratios;  // r_j for j <= m, an inf answer contributes 0
    double sigma = 0.0;   // 0 when m < 2
    int m = 0;
};

// r_j = (tau_j / 2 - 1) / t_j up to and including the first inf answer.
inline std::vector<double> delay_ratios(const SurveyResponse& resp) {
    std::vector<double> r;
    for (const auto& d : resp.delay_answers) {
        if (std::isinf(d.t)) {
            r.push_back(0.0);
            break;
        }
        r.push_back((d.tau / kReferenceDetention - 1.0) / d.t);
    }
    return r;
}

inline double estimate_sigma(std::span<const double> ratios, double k_hat) {
    const int m = static_cast<int>(ratios.size());
    if (m < 2) throw DomainError("estimate_sigma: needs m >= 2 answers");
    if (k_hat == 0.0) return 0.0;
    double J = 0.0;
    for (double r : ratios) J += (r / k_hat - 1.0) * (r / k_hat - 1.0);
    J /= m;
    if (J == 0.0) return 0.0;
    return sigma_table(m).invert(J);
}

inline double estimate_sigma(const SurveyResponse& resp, double k_hat) {
    const auto r = delay_ratios(resp);
    return estimate_sigma(r, k_hat);
}

// A lone finite answer (m = 1) gives se = 0: sigma is not identifiable.
inline KFit fit_k(const SurveyResponse& resp) {
    if (resp.delay_answers.empty()) throw DomainError("estimate_k: no delay answers");
    KFit fit;
    fit.ratios = delay_ratios(resp);
    fit.m = static_cast<int>(fit.ratios.size());
    fit.k.n_used = fit.ratios.size();
    if (fit.m == 1 && fit.ratios[0] == 0.0) return fit;  // inf at tau = 2.5
    fit.k.value = std::accumulate(fit.ratios.begin(), fit.ratios.end(), 0.0) / fit.m;
    if (fit.m >= 2) {
        fit.sigma = estimate_sigma(fit.ratios, fit.k.value);
        fit.k.se = fit.k.value * fit.sigma / std::sqrt(static_cast<double>(fit.m));
    }
    return fit;
}

inline EstimateWithSE estimate_k(const SurveyResponse& resp) { return fit_k(resp).k; }

// ---------------------------------------------------------------- rho, beta

struct RhoBeta {
    EstimateWithSE rho;
    EstimateWithSE beta;  // n_used = respondents with k_hat > 0
    bool beta_defined = false;
};

inline RhoBeta estimate_rho_beta(std::span<const KFit> fits) {
    const std::size_t n = fits.size();
    if (n < 2) throw DomainError("estimate_rho_beta: needs n >= 2");
    RhoBeta out;
    double M = 0.0;
    double rsum = 0.0;
    double m2 = 0.0;
    double msig2 = 0.0;
    std::size_t nonzero = 0;
    for (const auto& f : fits) {
        if (!(f.k.value > 0.0)) continue;
        ++nonzero;
        M += f.m;
        m2 += static_cast<double>(f.m) * f.m;
        msig2 += f.m * f.sigma * f.sigma;
        rsum += std::accumulate(f.ratios.begin(), f.ratios.end(), 0.0);
    }
    const double rho = static_cast<double>(nonzero) / static_cast<double>(n);
    out.rho = {rho, std::sqrt(rho * (1.0 - rho) / static_cast<double>(n)), n};
    if (nonzero == 0) return out;
    out.beta_defined = true;
    const double beta = rsum / M;
    out.beta = {beta, beta * std::sqrt(m2 / (M * M) + 2.0 * msig2 / (M * M)), nonzero};
    return out;
}

inline RhoBeta estimate_rho_beta(std::span<const SurveyResponse> responses) {
    std::vector<KFit> fits;
    fits.reserve(responses.size());
    for (const auto& r : responses) fits.push_back(fit_k(r));
    return estimate_rho_beta(fits);
}

// ---------------------------------------------------------------- gamma per respondent

// d pi / d gamma at fixed p.
inline double weighting_pi_dgamma(double p, double gamma) {
    if (p == 0.0 || p == 1.0) return 0.0;
    const double q = 1.0 - p;
    const double a = std::pow(p, gamma);
    const double b = std::pow(q, gamma);
    const double S = a + b;
    const double dlog = std::log(p) + std::log(S) / (gamma * gamma) - (a * std::log(p) + b * std::log(q)) / (gamma * S);
    return weighting_pi(p, gamma) * dlog;
}

struct GammaFit {
    EstimateWithSE gamma;
    EstimateWithSE sd_sum;  // S + D
    double residual_ss = 0.0;
    bool at_boundary = false;
    bool degenerate = false;  // every B is zero: gamma not identifiable
};

inline constexpr double kGammaLo = 0.01;
inline constexpr double kGammaHi = 0.99;

inline GammaFit estimate_gamma(std::span<const FineAnswer> pts) {
    const std::size_t n = pts.size();
    if (n < 3) throw DomainError("estimate_gamma: needs >= 3 fine-scenario answers");
    GammaFit fit;
    fit.gamma.n_used = fit.sd_sum.n_used = n;
    if (std::all_of(pts.begin(), pts.end(), [](const FineAnswer& f) { return f.B == 0.0; })) {
        fit.degenerate = true;
        fit.gamma.value = fit.sd_sum.value = std::numeric_limits<double>::quiet_NaN();
        return fit;
    }
    // For fixed gamma the optimal S + D is the projection of B on pi.
    auto theta_at = [&](double g) {
        double bp = 0.0, pp = 0.0;
        for (const auto& f : pts) {
            const double pi = weighting_pi(f.p, g);
            bp += f.B * pi;
            pp += pi * pi;
        }
        return bp / pp;
    };
    auto ss_at = [&](double g) {
        const double th = theta_at(g);
        double ss = 0.0;
        for (const auto& f : pts) {
            const double e = f.B - th * weighting_pi(f.p, g);
            ss += e * e;
        }
        return ss;
    };
    const auto best = numeric::scan_then_golden(ss_at, kGammaLo, kGammaHi, 98, 1e-11);
    const double g = best.x;
    const double th = theta_at(g);
    fit.gamma.value = g;
    fit.sd_sum.value = th;
    fit.residual_ss = best.fx;
    fit.at_boundary = g - kGammaLo < 1e-6 || kGammaHi - g < 1e-6;

    // Gauss-Newton covariance s^2 (J^T J)^-1, J = [theta dpi/dgamma, pi].
    double a = 0.0, b = 0.0, c = 0.0;
    for (const auto& f : pts) {
        const double jg = th * weighting_pi_dgamma(f.p, g);
        const double jt = weighting_pi(f.p, g);
        a += jg * jg;
        b += jg * jt;
        c += jt * jt;
    }
    const double det = a * c - b * b;
    if (n > 2 && det > 0.0) {
        const double s2 = best.fx / static_cast<double>(n - 2);
        fit.gamma.se = std::sqrt(s2 * c / det);
        fit.sd_sum.se = std::sqrt(s2 * a / det);
    } else {
        fit.gamma.se = fit.sd_sum.se = std::numeric_limits<double>::infinity();
    }
    return fit;
}

inline GammaFit estimate_gamma(const SurveyResponse& resp) { return estimate_gamma(resp.fine_answers); }

// ---------------------------------------------------------------- gamma population

// Var(S^2) for independent zero-mean normals with sds sigma_i.
inline double var_S2(std::span<const double> sigma) {
    const std::size_t n = sigma.size();
    if (n < 2) throw DomainError("var_S2: needs n >= 2");
    double s2 = 0.0, s4 = 0.0;
    for (double s : sigma) {
        s2 += s * s;
        s4 += s * s * s * s;
    }
    const double nd = static_cast<double>(n);
    s2 /= nd;
    s4 /= nd;
    return 2.0 * ((nd - 2.0) * s4 + s2 * s2) / ((nd - 1.0) * (nd - 1.0));
}

struct GammaPopulation {
    EstimateWithSE mu;
    EstimateWithSE sd;
    EstimateWithSE variance;
    bool clamped = false;  // sample variance fell below the mean per-respondent variance
};

inline GammaPopulation estimate_gamma_population(std::span<const EstimateWithSE> gammas) {
    const std::size_t n = gammas.size();
    if (n < 2) throw DomainError("estimate_gamma_population: needs n >= 2");
    const double nd = static_cast<double>(n);
    // Shifted by the first value so identical inputs give an exact mean.
    const double ref = gammas[0].value;
    double shift = 0.0, mean_se2 = 0.0;
    for (const auto& g : gammas) {
        shift += g.value - ref;
        mean_se2 += g.se * g.se;
    }
    const double mean = ref + shift / nd;
    mean_se2 /= nd;
    double ss = 0.0;
    for (const auto& g : gammas) ss += (g.value - mean) * (g.value - mean);
    GammaPopulation out;
    double var = ss / (nd - 1.0) - mean_se2;
    if (var < 0.0) {
        var = 0.0;
        out.clamped = true;
    }
    out.mu = {mean, std::sqrt((var + mean_se2) / nd), n};
    std::vector<double> total_sd(n);
    for (std::size_t i = 0; i < n; ++i) total_sd[i] = std::sqrt(var + gammas[i].se * gammas[i].se);
    const double var_se = std::sqrt(var_S2(total_sd));
    out.variance = {var, var_se, n};
    const double sd = std::sqrt(var);
    // Delta method; at sd = 0 it breaks down and the variance SE's root is reported.
    out.sd = {sd, sd > 0.0 ? var_se / (2.0 * sd) : std::sqrt(var_se), n};
    return out;
}

// ---------------------------------------------------------------- harshness

// Fine/immediate-detention indifference with t = 0.
inline double harshness_from(double k, double w, double tau, double f = kSurveyFine) {
    detail::require(w > 0.0 && tau > 0.0 && f > 0.0 && k >= 0.0, "harshness: need w, tau, f > 0 and k >= 0");
    if (k == 0.0) return f / (w * tau);
    return k * f / (w * std::log1p(k * tau));
}

inline std::optional<double> estimate_harshness(const SurveyResponse& resp, double k_hat) {
    if (!resp.detention_hours) return std::nullopt;
    return harshness_from(k_hat, resp.salary, *resp.detention_hours);
}

struct HarshnessSummary {
    double median = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_used = 0;
    std::size_t n_skipped = 0;
};

inline double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// ---------------------------------------------------------------- independence

struct NamedEstimate {
    std::string name;
    EstimateWithSE est;
};

struct SplitRow {
    std::string name;
    EstimateWithSE lower;
    EstimateWithSE upper;
    double z = 0.0;
};

struct SplitReport {
    double median = 0.0;
    std::size_t n_lower = 0;
    std::size_t n_upper = 0;
    std::vector<SplitRow> rows;
};

// Stable-sorts by A; the first floor(n/2) samples form the lower half.
template <class B, class Fitter>
SplitReport independence_split(std::span<const double> a, std::span<const B> b, Fitter&& fit) {
    const std::size_t n = a.size();
    if (n != b.size()) throw DomainError("independence_split: sample sizes differ");
    if (n < 4) throw DomainError("independence_split: needs n >= 4");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return a[i] < a[j]; });
    const std::size_t half = n / 2;
    std::vector<B> lo, hi;
    for (std::size_t i = 0; i < n; ++i) (i < half ? lo : hi).push_back(b[idx[i]]);
    const std::vector<NamedEstimate> fa = fit(std::span<const B>(lo));
    const std::vector<NamedEstimate> fb = fit(std::span<const B>(hi));
    if (fa.size() != fb.size()) throw DomainError("independence_split: fitter returned mismatched parameter lists");
    SplitReport rep;
    rep.median = median_of(std::vector<double>(a.begin(), a.end()));
    rep.n_lower = lo.size();
    rep.n_upper = hi.size();
    for (std::size_t i = 0; i < fa.size(); ++i) {
        const double diff = std::abs(fa[i].est.value - fb[i].est.value);
        const double se = std::hypot(fa[i].est.se, fb[i].est.se);
        const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        rep.rows.push_back({fa[i].name, fa[i].est, fb[i].est, z});
    }
    return rep;
}

// ---------------------------------------------------------------- histograms

struct HistogramRow {
    double bin_left = 0.0;
    double bin_right = 0.0;
    std::size_t count = 0;
    double fitted_density = 0.0;  // bin-averaged fitted pdf; the atom row carries its probability mass
};

// First row is the k = 0 atom [0, 0]; positive k in bins of width beta/4.
inline std::vector<HistogramRow> k_histogram(std::span<const double> k, double rho, double beta) {
    detail::require(beta > 0.0, "k_histogram: beta must be > 0");
    std::vector<HistogramRow> rows;
    HistogramRow atom{0.0, 0.0, 0, 1.0 - rho};
    double kmax = 0.0;
    for (double x : k) {
        if (x == 0.0) ++atom.count;
        kmax = std::max(kmax, x);
    }
    rows.push_back(atom);
    const double w = beta / 4.0;
    const auto nbins = static_cast<std::size_t>(std::floor(kmax / w)) + 1;
    for (std::size_t i = 0; i < nbins; ++i) {
        const double l = i * w, r = (i + 1) * w;
        rows.push_back({l, r, 0, rho * (std::exp(-l / beta) - std::exp(-r / beta)) / w});
    }
    for (double x : k)
        if (x > 0.0) ++rows[1 + std::min(nbins - 1, static_cast<std::size_t>(std::floor(x / w)))].count;
    return rows;
}

// Bins of width 0.02 aligned to multiples of 0.02.
inline std::vector<HistogramRow> gamma_histogram(std::span<const double> g, double mu, double sd) {
    std::vector<HistogramRow> rows;
    if (g.empty()) return rows;
    constexpr double w = 0.02;
    const auto [mn, mx] = std::minmax_element(g.begin(), g.end());
    const auto first = static_cast<long>(std::floor(*mn / w));
    const auto last = static_cast<long>(std::floor(*mx / w));
    auto Phi = [&](double x) { return 0.5 * std::erfc(-(x - mu) / (sd * std::numbers::sqrt2)); };
    for (long i = first; i <= last; ++i) {
        const double l = i * w, r = (i + 1) * w;
        const double dens = sd > 0.0 ? (Phi(r) - Phi(l)) / w : 0.0;
        rows.push_back({l, r, 0, dens});
    }
    for (double x : g) ++rows[static_cast<std::size_t>(std::floor(x / w) - first)].count;
    return rows;
}

inline void write_histogram(std::ostream& out, std::span<const HistogramRow> rows) {
    out << "bin_left,bin_right,count,fitted_density\n";
    for (const auto& r : rows)
        out << detail::format_number(r.bin_left) << ',' << detail::format_number(r.bin_right) << ',' << r.count << ','
            << detail::format_number(r.fitted_density) << '\n';
}

// ---------------------------------------------------------------- synthetic surveys

struct SyntheticSurvey {
    std::size_t n = 200;
    DiscountDist discount{0.66, 0.00431};
    double sigma_k = 0.2;          // multiplicative error sd on each delay answer
    GammaDist gamma{0.61, 0.07};
    double sum_sd = 568.0;         // S + D
    double noise_B = 5.0;          // additive error sd on each B answer
    WealthDist salary{2.5, 3000.0};
    double r_median = 0.0505;      // harshness, log-normal spread r_spread around it
    double r_spread = 0.3;
};

struct SyntheticTruth {
    double k = 0.0;
    double gamma = 0.0;
    double r = 0.0;
};

// Each respondent with k > 0 answers all four delay questions; k = 0 answers inf
// throughout. Negative B draws clamp to 0.
template <class Rng>
SurveyResponse synthesize_respondent(const SyntheticSurvey& s, std::size_t index, Rng& rng,
                                     SyntheticTruth* truth = nullptr) {
    std::normal_distribution<double> z(0.0, 1.0);
    SurveyResponse r;
    r.respondent_id = "r" + std::to_string(index + 1);
    r.salary = draw_wealth(s.salary, rng);
    const double k = draw_discount(s.discount, rng);
    for (double tau : kDelayTaus) {
        double t = std::numeric_limits<double>::infinity();
        if (k > 0.0) {
            double e;
            do e = s.sigma_k * z(rng);
            while (!(1.0 + e > 0.0));
            t = (tau / kReferenceDetention - 1.0) / (k * (1.0 + e));
        }
        r.delay_answers.push_back({tau, t});
    }
    const double g = draw_gamma(s.gamma, rng);
    for (double p : kPricePoints)
        r.fine_answers.push_back({p, std::max(0.0, weighting_pi(p, g) * s.sum_sd + s.noise_B * z(rng))});
    const double rr = s.r_median * std::exp(s.r_spread * z(rng));
    // Detention length that makes this respondent indifferent to the fine.
    const double x = k * kSurveyFine / (r.salary * rr);
    if (k == 0.0)
        r.detention_hours = kSurveyFine / (r.salary * rr);
    else if (x < 700.0)
        r.detention_hours = std::expm1(x) / k;
    if (truth) *truth = {k, g, rr};
    return r;
}

inline std::vector<SurveyResponse> synthesize_survey(const SyntheticSurvey& s, std::uint64_t seed,
                                                     std::vector<SyntheticTruth>* truth = nullptr) {
    std::mt19937_64 rng(detail::splitmix64(seed));
    std::vector<SurveyResponse> out;
    out.reserve(s.n);
    if (truth) truth->assign(s.n, {});
    for (std::size_t i = 0; i < s.n; ++i)
        out.push_back(synthesize_respondent(s, i, rng, truth ? &(*truth)[i] : nullptr));
    return out;
}

}  // namespace deterrence

#endif
