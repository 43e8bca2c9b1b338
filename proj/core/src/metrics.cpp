#include "pinnlab/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pinnlab/errors.hpp"

namespace pinnlab {

L2Errors l2_errors(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
    if (pred.size() != truth.size() || pred.size() == 0)
        throw ConfigError("l2_errors: vector length mismatch or empty");
    L2Errors e;
    const double diff = (pred - truth).norm();
    e.abs = diff / std::sqrt(static_cast<double>(pred.size()));
    const double tn = truth.norm();
    if (tn > 0.0) {
        e.rel = diff / tn;
    } else {
        e.rel = std::numeric_limits<double>::quiet_NaN();
        e.rel_defined = false;
    }
    return e;
}

double max_error(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
    if (pred.size() != truth.size() || pred.size() == 0)
        throw ConfigError("max_error: vector length mismatch or empty");
    return (pred - truth).cwiseAbs().maxCoeff();
}

ExplainedVariance explained_variance(const Eigen::VectorXd& pred,
                                     const Eigen::VectorXd& truth) {
    if (pred.size() != truth.size() || pred.size() == 0)
        throw ConfigError("explained_variance: vector length mismatch or empty");
    auto pop_var = [](const Eigen::VectorXd& v) {
        const double m = v.mean();
        return (v.array() - m).square().mean();
    };
    ExplainedVariance r;
    const double vt = pop_var(truth);
    if (vt == 0.0) {
        r.value = std::numeric_limits<double>::quiet_NaN();
        r.defined = false;
        return r;
    }
    r.value = 1.0 - pop_var(truth - pred) / vt;
    return r;
}

namespace {

MetricsRow reduce(const std::vector<MetricsRow>& rows, bool stddev) {
    if (rows.empty()) throw ConfigError("MetricsReport: no rows to aggregate");
    auto stat = [&](auto get) {
        double mean = 0.0;
        for (const auto& r : rows) mean += get(r);
        mean /= static_cast<double>(rows.size());
        if (!stddev) return mean;
        double var = 0.0;
        for (const auto& r : rows) var += (get(r) - mean) * (get(r) - mean);
        return std::sqrt(var / static_cast<double>(rows.size()));
    };
    MetricsRow a;
    a.family = rows.front().family;
    a.range = rows.front().range;
    a.instance_id = stddev ? "std" : "mean";
    a.abs = stat([](const MetricsRow& r) { return r.abs; });
    a.rel = stat([](const MetricsRow& r) { return r.rel; });
    a.max = stat([](const MetricsRow& r) { return r.max; });
    a.exp_var = stat([](const MetricsRow& r) { return r.exp_var; });
    return a;
}

}  // namespace

MetricsRow MetricsReport::aggregate_mean() const { return reduce(rows, false); }
MetricsRow MetricsReport::aggregate_std() const { return reduce(rows, true); }

void save_report(const MetricsReport& r, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("save_report: cannot open " + path.string());
    os.precision(17);  // value-exact round trip for downstream comparisons
    os << "family\trange\tinstance\tseed\tabs\trel\tmax\texp_var\n";
    auto put = [&](const MetricsRow& row) {
        os << row.family << "\t" << row.range << "\t" << row.instance_id << "\t"
           << row.seed << "\t" << row.abs << "\t" << row.rel << "\t" << row.max
           << "\t" << row.exp_var << "\n";
    };
    for (const auto& row : r.rows) put(row);
    if (!r.rows.empty()) {
        put(r.aggregate_mean());
        put(r.aggregate_std());
    }
    if (!os) throw IoError("save_report: write failure " + path.string());
}

MetricsReport load_report(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("load_report: cannot open " + path.string());
    MetricsReport r;
    std::string line;
    if (!std::getline(is, line)) throw IoError("load_report: empty file");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        MetricsRow row;
        if (!(ss >> row.family >> row.range >> row.instance_id >> row.seed >>
              row.abs >> row.rel >> row.max >> row.exp_var))
            throw IoError("load_report: malformed row: " + line);
        if (row.instance_id == "mean" || row.instance_id == "std") continue;
        r.rows.push_back(row);
    }
    return r;
}

}  // namespace pinnlab
