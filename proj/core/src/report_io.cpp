#include "l2e/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "json.hpp"

#include "l2e/error.hpp"

namespace l2e {

namespace {

using nlohmann::json;

json num(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double to_num(const json& j)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw InvalidArgument("fit report: expected a number, got " + j.dump());
}

json vec(const VectorXd& v)
{
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

VectorXd to_vec(const json& j)
{
    if (!j.is_array()) throw InvalidArgument("fit report: expected an array");
    VectorXd v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = to_num(j[i]);
    return v;
}

const json& field(const json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end()) throw InvalidArgument(std::string("fit report: missing '") + key + "'");
    return *it;
}

} // namespace

std::string fit_report_to_json(const FitReport& r, int indent)
{
    json j;
    j["beta"] = vec(r.beta);
    j["eta"] = num(r.eta);
    j["tau"] = num(r.tau());
    j["weights"] = vec(r.weights);
    json trace = json::array();
    for (double v : r.loss_trace) trace.push_back(num(v));
    j["loss_trace"] = trace;
    j["outer_iters"] = r.outer_iters;
    j["inner_beta_iters"] = r.inner_beta_iters;
    j["inner_eta_iters"] = r.inner_eta_iters;
    j["converged"] = r.converged;
    j["precision_diverged"] = r.precision_diverged;
    j["init_warning"] = r.init_warning;
    j["constraint_distance"] = num(r.constraint_distance);
    j["stage_starts"] = r.stage_starts;
    return j.dump(indent);
}

FitReport fit_report_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("fit report: ") + e.what());
    }
    if (!j.is_object()) throw InvalidArgument("fit report: expected a JSON object");
    try {
        FitReport r;
        r.beta = to_vec(field(j, "beta"));
        r.eta = to_num(field(j, "eta"));
        r.weights = to_vec(field(j, "weights"));
        for (const json& v : field(j, "loss_trace")) r.loss_trace.push_back(to_num(v));
        r.outer_iters = field(j, "outer_iters").get<int>();
        r.inner_beta_iters = field(j, "inner_beta_iters").get<std::vector<int>>();
        r.inner_eta_iters = field(j, "inner_eta_iters").get<std::vector<int>>();
        r.converged = field(j, "converged").get<bool>();
        r.precision_diverged = field(j, "precision_diverged").get<bool>();
        r.init_warning = field(j, "init_warning").get<bool>();
        r.constraint_distance = to_num(field(j, "constraint_distance"));
        r.stage_starts = field(j, "stage_starts").get<std::vector<int>>();
        return r;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("fit report: ") + e.what());
    }
}

void write_weights_csv(std::ostream& os, const Dataset& data, const FitReport& r)
{
    const VectorXd res = residuals(data, r.beta);
    const double tau = r.tau();
    char buf[128];
    os << "case,residual,weight,log_weight\n";
    for (Index i = 0; i < res.size(); ++i) {
        const double tr = tau * res[i];
        const double logw = -0.5 * tr * tr;
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(i + 1), res[i],
                      std::exp(logw), logw);
        os << buf;
    }
}

} // namespace l2e
