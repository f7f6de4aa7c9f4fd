#ifndef ABIP_PROBLEMS_JSON_IO_HPP
#define ABIP_PROBLEMS_JSON_IO_HPP

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "abip/core.hpp"

namespace abip::problems
{

using json = nlohmann::json;

inline constexpr int kJsonFormatVersion = 1;

namespace detail
{
// JSON has no inf/nan; they travel as strings.
inline json number_to_json(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double number_from_json(const json& j)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw Error("expected a number, got " + j.dump());
}

inline json vec_to_json(const Vec& v)
{
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(number_to_json(v[i]));
    return a;
}

inline Vec vec_from_json(const json& j, const char* what)
{
    if (!j.is_array()) throw Error(std::string(what) + " must be an array");
    Vec v(Index(j.size()));
    for (size_t i = 0; i < j.size(); ++i) v[Index(i)] = number_from_json(j[i]);
    return v;
}

inline const json& field(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end()) throw Error(std::string("missing field '") + key + "'");
    return *it;
}
} // namespace detail

/// Problem schema, format 1:
///
///     { "format": 1, "name": "...", "m": int, "n": int,
///       "A": { "colptr": [n+1], "rowidx": [nnz], "values": [nnz] },
///       "b": [m], "c": [n],
///       "cones": [ { "type": "nonneg"|"soc"|"rsoc"|"sdc", "dim": int } ] }
///
/// `dim` is the number of scalar variables of the block. For sdc it must be
/// k(k+1)/2 for the matrix order k.
inline json problem_to_json(const ConicProblem& p)
{
    SparseMatrix a = p.A;
    a.makeCompressed();
    json colptr = json::array();
    json rowidx = json::array();
    json values = json::array();
    for (Index j = 0; j <= a.cols(); ++j) colptr.push_back(a.outerIndexPtr()[j]);
    for (Index k = 0; k < a.nonZeros(); ++k) {
        rowidx.push_back(a.innerIndexPtr()[k]);
        values.push_back(a.valuePtr()[k]);
    }
    json cones = json::array();
    for (const auto& k : p.cones) cones.push_back({{"type", std::string(to_string(k.kind))}, {"dim", k.dim()}});
    return json{{"format", kJsonFormatVersion},
                {"name", p.name},
                {"m", p.rows()},
                {"n", p.cols()},
                {"A", {{"colptr", colptr}, {"rowidx", rowidx}, {"values", values}}},
                {"b", detail::vec_to_json(p.b)},
                {"c", detail::vec_to_json(p.c)},
                {"cones", cones}};
}

inline ConicProblem problem_from_json(const json& j)
{
    using detail::field;
    const int fmt = field(j, "format").get<int>();
    if (fmt != kJsonFormatVersion) throw Error("unsupported problem format " + std::to_string(fmt));
    const Index m = field(j, "m").get<Index>();
    const Index n = field(j, "n").get<Index>();
    if (m < 1 || n < 1) throw Error("m and n must be positive");
    const json& aj = field(j, "A");
    const auto colptr = field(aj, "colptr").get<std::vector<Index>>();
    const auto rowidx = field(aj, "rowidx").get<std::vector<Index>>();
    const auto values = field(aj, "values").get<std::vector<double>>();
    if (Index(colptr.size()) != n + 1) throw Error("A.colptr must have n+1 entries");
    if (rowidx.size() != values.size()) throw Error("A.rowidx and A.values differ in length");
    if (colptr.front() != 0 || colptr.back() != Index(rowidx.size())) throw Error("A.colptr is inconsistent");
    std::vector<Triplet> trips;
    trips.reserve(values.size());
    for (Index c = 0; c < n; ++c) {
        if (colptr[size_t(c + 1)] < colptr[size_t(c)]) throw Error("A.colptr is not monotone");
        for (Index k = colptr[size_t(c)]; k < colptr[size_t(c + 1)]; ++k) {
            const Index r = rowidx[size_t(k)];
            if (r < 0 || r >= m) throw Error("A.rowidx out of range at entry " + std::to_string(k));
            trips.emplace_back(int(r), int(c), values[size_t(k)]);
        }
    }
    ConicProblem p;
    p.A.resize(m, n);
    p.A.setFromTriplets(trips.begin(), trips.end());
    p.A.makeCompressed();
    p.b = detail::vec_from_json(field(j, "b"), "b");
    p.c = detail::vec_from_json(field(j, "c"), "c");
    if (j.contains("name")) p.name = j["name"].get<std::string>();
    for (const auto& cj : field(j, "cones")) {
        const auto type = field(cj, "type").get<std::string>();
        const Index dim = field(cj, "dim").get<Index>();
        if (type == "nonneg") {
            p.cones.push_back(Cone::nonneg(dim));
        } else if (type == "soc") {
            p.cones.push_back(Cone::soc(dim));
        } else if (type == "rsoc") {
            p.cones.push_back(Cone::rsoc(dim));
        } else if (type == "sdc") {
            const auto k = Index(std::llround((std::sqrt(8.0 * double(dim) + 1.0) - 1.0) / 2.0));
            if (k * (k + 1) / 2 != dim) throw Error("sdc dim " + std::to_string(dim) + " is not triangular");
            p.cones.push_back(Cone::sdc(k));
        } else {
            throw Error("unknown cone type '" + type + "'");
        }
    }
    p.validate();
    return p;
}

inline ConicProblem read_problem_json_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw Error("cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw Error(path + ": " + e.what());
    }
    try {
        return problem_from_json(j);
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
}

inline json residuals_to_json(const Residuals& r)
{
    return {{"pres", detail::number_to_json(r.pres)},
            {"dres", detail::number_to_json(r.dres)},
            {"dgap", detail::number_to_json(r.dgap)},
            {"norm", r.norm_mode == NormMode::two_norm ? "two" : "inf"}};
}

inline json result_to_json(const SolveResult& r)
{
    using detail::number_to_json;
    return json{{"status", std::string(to_string(r.status))},
                {"objective_primal", number_to_json(r.objective_primal)},
                {"objective_dual", number_to_json(r.objective_dual)},
                {"residuals", residuals_to_json(r.residuals)},
                {"tol", number_to_json(r.tol)},
                {"tau", number_to_json(r.tau)},
                {"kappa", number_to_json(r.kappa)},
                {"iterations", {{"outer", r.outer_iters}, {"admm", r.admm_iters}}},
                {"wall_time", number_to_json(r.wall_time)},
                {"x", detail::vec_to_json(r.x)},
                {"y", detail::vec_to_json(r.y)},
                {"s", detail::vec_to_json(r.s)}};
}

inline SolveResult result_from_json(const json& j)
{
    using detail::field;
    using detail::number_from_json;
    SolveResult r;
    const auto st = status_from_string(field(j, "status").get<std::string>());
    if (!st) throw Error("unknown status " + field(j, "status").dump());
    r.status = *st;
    r.objective_primal = number_from_json(field(j, "objective_primal"));
    r.objective_dual = number_from_json(field(j, "objective_dual"));
    const json& rj = field(j, "residuals");
    r.residuals.pres = number_from_json(field(rj, "pres"));
    r.residuals.dres = number_from_json(field(rj, "dres"));
    r.residuals.dgap = number_from_json(field(rj, "dgap"));
    r.residuals.norm_mode = field(rj, "norm").get<std::string>() == "inf" ? NormMode::inf_norm : NormMode::two_norm;
    r.tol = number_from_json(field(j, "tol"));
    r.tau = number_from_json(field(j, "tau"));
    r.kappa = number_from_json(field(j, "kappa"));
    r.outer_iters = field(field(j, "iterations"), "outer").get<Index>();
    r.admm_iters = field(field(j, "iterations"), "admm").get<Index>();
    r.wall_time = number_from_json(field(j, "wall_time"));
    r.x = detail::vec_from_json(field(j, "x"), "x");
    r.y = detail::vec_from_json(field(j, "y"), "y");
    r.s = detail::vec_from_json(field(j, "s"), "s");
    return r;
}

} // namespace abip::problems

#endif // ABIP_PROBLEMS_JSON_IO_HPP
