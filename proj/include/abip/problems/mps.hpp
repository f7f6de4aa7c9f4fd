#ifndef ABIP_PROBLEMS_MPS_HPP
#define ABIP_PROBLEMS_MPS_HPP

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "abip/core.hpp"

namespace abip::problems
{

class ParseError : public Error
{
public:
    ParseError(const std::string& what, Index line) : Error("line " + std::to_string(line) + ": " + what), m_line(line) {}
    Index line() const noexcept { return m_line; }

private:
    Index m_line;
};

enum class MpsFormat : std::uint8_t
{
    free,
    fixed,
};

/// Original variable j equals shift[j] + sum_k coef * x_std[col].
struct StandardFormMap
{
    struct Term
    {
        Index col;
        double coef;
    };
    std::vector<double> shift;
    std::vector<std::vector<Term>> terms;
    std::vector<std::string> names;

    Index original_size() const noexcept { return Index(shift.size()); }

    Vec to_original(const Vec& x_std) const
    {
        Vec out(original_size());
        for (Index j = 0; j < original_size(); ++j) {
            double v = shift[size_t(j)];
            for (const auto& t : terms[size_t(j)]) v += t.coef * x_std[t.col];
            out[j] = v;
        }
        return out;
    }
};

/// LP read from MPS, converted to  min c'x  s.t.  A x = b,  x >= 0.
/// The original objective is  sense * (c'x + objective_offset).
struct MpsProblem
{
    ConicProblem problem;
    StandardFormMap map;
    double objective_offset = 0.0;
    bool maximize = false;
    std::vector<std::string> row_names;

    double original_objective(double standard_objective) const
    {
        const double v = standard_objective + objective_offset;
        return maximize ? -v : v;
    }
};

namespace detail
{
inline std::vector<std::string> split_ws(std::string_view line)
{
    std::vector<std::string> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string trim(std::string_view s)
{
    size_t a = 0;
    size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

// Fixed-format data fields (1-based columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61).
inline std::vector<std::string> split_fixed(std::string_view line)
{
    static const std::pair<size_t, size_t> spans[] = {{1, 2}, {4, 8}, {14, 8}, {24, 12}, {39, 8}, {49, 12}};
    std::vector<std::string> out;
    for (auto [start, len] : spans) {
        if (start >= line.size()) {
            out.emplace_back();
            continue;
        }
        out.push_back(trim(line.substr(start, std::min(len, line.size() - start))));
    }
    return out;
}

inline double parse_number(const std::string& s, Index line)
{
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad number '" + s + "'", line);
    }
}
} // namespace detail

/// Parses an LP in fixed or free MPS format and converts it to standard form.
inline MpsProblem read_mps(std::string_view text, MpsFormat format = MpsFormat::free)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    enum class Section { none, name, objsense, rows, columns, rhs, ranges, bounds, end };
    struct Row
    {
        char type;
        double rhs = 0.0;
        std::optional<double> range;
    };
    std::vector<Row> rows;
    std::unordered_map<std::string, Index> row_index;
    std::vector<std::string> row_names;
    std::string obj_row;
    std::vector<std::string> col_names;
    std::unordered_map<std::string, Index> col_index;
    std::vector<std::vector<std::pair<Index, double>>> col_entries;
    std::vector<double> obj;
    std::vector<double> lower;
    std::vector<double> upper;
    double obj_rhs = 0.0;
    bool maximize = false;
    std::string name;

    Section sec = Section::none;
    Index lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    bool seen_end = false;

    auto find_row = [&](const std::string& r, Index ln) -> Index {
        if (r == obj_row) return -1;
        auto it = row_index.find(r);
        if (it == row_index.end()) throw ParseError("unknown row '" + r + "'", ln);
        return it->second;
    };
    auto find_col = [&](const std::string& c, Index ln) -> Index {
        auto it = col_index.find(c);
        if (it == col_index.end()) throw ParseError("unknown column '" + c + "'", ln);
        return it->second;
    };

    while (std::getline(in, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty() || raw[0] == '*') continue;
        const bool header = !std::isspace(static_cast<unsigned char>(raw[0]));
        auto tok = detail::split_ws(raw);
        if (tok.empty()) continue;
        if (header) {
            const std::string& h = tok[0];
            if (h == "NAME") {
                sec = Section::name;
                if (tok.size() > 1) name = tok[1];
            } else if (h == "OBJSENSE") {
                sec = Section::objsense;
                if (tok.size() > 1) {
                    maximize = tok[1] == "MAX" || tok[1] == "MAXIMIZE";
                    sec = Section::none;
                }
            } else if (h == "OBJSENCE") {
                sec = Section::objsense;
            } else if (h == "ROWS") {
                sec = Section::rows;
            } else if (h == "COLUMNS") {
                sec = Section::columns;
            } else if (h == "RHS") {
                sec = Section::rhs;
            } else if (h == "RANGES") {
                sec = Section::ranges;
            } else if (h == "BOUNDS") {
                sec = Section::bounds;
            } else if (h == "ENDATA") {
                seen_end = true;
                break;
            } else if (sec == Section::objsense && (h == "MAX" || h == "MIN" || h == "MAXIMIZE" || h == "MINIMIZE")) {
                maximize = h.rfind("MAX", 0) == 0;
            } else {
                throw ParseError("unknown section '" + h + "'", lineno);
            }
            continue;
        }
        std::vector<std::string> f;
        if (format == MpsFormat::fixed && sec != Section::objsense) {
            f = detail::split_fixed(raw);
        }
        switch (sec) {
        case Section::objsense: {
            maximize = tok[0].rfind("MAX", 0) == 0;
            if (!maximize && tok[0].rfind("MIN", 0) != 0) throw ParseError("bad OBJSENSE '" + tok[0] + "'", lineno);
            break;
        }
        case Section::rows: {
            std::string type = format == MpsFormat::fixed ? f[0] : tok[0];
            std::string rname = format == MpsFormat::fixed ? f[1] : (tok.size() > 1 ? tok[1] : "");
            if (type.empty() || rname.empty()) throw ParseError("malformed ROWS entry", lineno);
            const char t = char(std::toupper(static_cast<unsigned char>(type[0])));
            if (t == 'N') {
                if (obj_row.empty()) obj_row = rname;
                else row_index.emplace(rname, -2); // extra free rows are ignored
            } else if (t == 'E' || t == 'L' || t == 'G') {
                if (row_index.count(rname) || rname == obj_row) throw ParseError("duplicate row '" + rname + "'", lineno);
                row_index.emplace(rname, Index(rows.size()));
                rows.push_back(Row{t, 0.0, std::nullopt});
                row_names.push_back(rname);
            } else {
                throw ParseError("unknown row type '" + type + "'", lineno);
            }
            break;
        }
        case Section::columns: {
            if (raw.find("'MARKER'") != std::string::npos) {
                throw ParseError("integer markers are not supported (LP only)", lineno);
            }
            std::vector<std::string> g;
            if (format == MpsFormat::fixed) {
                g = {f[1], f[2], f[3]};
                if (!f[4].empty()) {
                    g.push_back(f[4]);
                    g.push_back(f[5]);
                }
            } else {
                g = tok;
            }
            if (g.size() != 3 && g.size() != 5) throw ParseError("malformed COLUMNS entry", lineno);
            const std::string& cname = g[0];
            auto it = col_index.find(cname);
            Index j;
            if (it == col_index.end()) {
                j = Index(col_names.size());
                col_index.emplace(cname, j);
                col_names.push_back(cname);
                col_entries.emplace_back();
                obj.push_back(0.0);
                lower.push_back(0.0);
                upper.push_back(inf);
            } else {
                j = it->second;
            }
            for (size_t k = 1; k + 1 < g.size(); k += 2) {
                const double v = detail::parse_number(g[k + 1], lineno);
                const Index r = find_row(g[k], lineno);
                if (r == -1) {
                    obj[size_t(j)] += v;
                } else if (r >= 0 && v != 0.0) {
                    col_entries[size_t(j)].emplace_back(r, v);
                }
            }
            break;
        }
        case Section::rhs:
        case Section::ranges: {
            std::vector<std::string> g;
            if (format == MpsFormat::fixed) {
                g = {f[2], f[3]};
                if (!f[4].empty()) {
                    g.push_back(f[4]);
                    g.push_back(f[5]);
                }
            } else {
                // the set name is optional when the entry count is even
                g.assign(tok.begin() + ((tok.size() % 2 == 1) ? 1 : 0), tok.end());
            }
            if (g.size() != 2 && g.size() != 4) throw ParseError("malformed RHS/RANGES entry", lineno);
            for (size_t k = 0; k + 1 < g.size(); k += 2) {
                const double v = detail::parse_number(g[k + 1], lineno);
                const Index r = find_row(g[k], lineno);
                if (sec == Section::rhs) {
                    if (r == -1) obj_rhs = v;
                    else if (r >= 0) rows[size_t(r)].rhs = v;
                } else {
                    if (r < 0) throw ParseError("RANGES on the objective row", lineno);
                    rows[size_t(r)].range = v;
                }
            }
            break;
        }
        case Section::bounds: {
            std::string type, cname, val;
            if (format == MpsFormat::fixed) {
                type = f[0];
                cname = f[2];
                val = f[3];
            } else {
                if (tok.size() < 2) throw ParseError("malformed BOUNDS entry", lineno);
                type = tok[0];
                const bool no_value = type == "FR" || type == "MI" || type == "PL";
                if (no_value) {
                    cname = tok.size() >= 3 ? tok[2] : tok[1];
                } else {
                    if (tok.size() == 4) {
                        cname = tok[2];
                        val = tok[3];
                    } else if (tok.size() == 3) {
                        cname = tok[1];
                        val = tok[2];
                    } else {
                        throw ParseError("malformed BOUNDS entry", lineno);
                    }
                }
            }
            const Index j = find_col(cname, lineno);
            auto& lo = lower[size_t(j)];
            auto& up = upper[size_t(j)];
            if (type == "UP") {
                const double v = detail::parse_number(val, lineno);
                up = v;
                if (v < 0.0 && lo == 0.0) lo = -inf;
            } else if (type == "LO") {
                lo = detail::parse_number(val, lineno);
            } else if (type == "FX") {
                lo = up = detail::parse_number(val, lineno);
            } else if (type == "FR") {
                lo = -inf;
                up = inf;
            } else if (type == "MI") {
                lo = -inf;
            } else if (type == "PL") {
                up = inf;
            } else if (type == "BV" || type == "LI" || type == "UI" || type == "SC") {
                throw ParseError("integer bound type '" + type + "' is not supported (LP only)", lineno);
            } else {
                throw ParseError("unknown bound type '" + type + "'", lineno);
            }
            break;
        }
        case Section::name:
        case Section::none:
        case Section::end: throw ParseError("data outside of a section", lineno);
        }
    }
    if (!seen_end) throw ParseError("missing ENDATA", lineno);
    if (obj_row.empty()) throw ParseError("no objective (N) row", lineno);
    if (col_names.empty()) throw ParseError("no columns", lineno);

    // Standard-form columns for each original variable.
    MpsProblem out;
    out.maximize = maximize;
    auto& map = out.map;
    map.shift.assign(col_names.size(), 0.0);
    map.terms.assign(col_names.size(), {});
    map.names = col_names;

    Index nstd = 0;
    std::vector<std::pair<Index, double>> upper_rows; // (std col, u - l) for boxed variables
    for (size_t j = 0; j < col_names.size(); ++j) {
        const double lo = lower[j];
        const double up = upper[j];
        if (lo > up) throw ParseError("infeasible bounds on '" + col_names[j] + "'", lineno);
        if (std::isfinite(lo) && lo == up) {
            map.shift[j] = lo; // fixed, eliminated
        } else if (std::isfinite(lo)) {
            map.shift[j] = lo;
            map.terms[j].push_back({nstd, 1.0});
            if (std::isfinite(up)) upper_rows.emplace_back(nstd, up - lo);
            ++nstd;
        } else if (std::isfinite(up)) {
            map.shift[j] = up;
            map.terms[j].push_back({nstd++, -1.0});
        } else {
            map.terms[j].push_back({nstd++, 1.0});
            map.terms[j].push_back({nstd++, -1.0});
        }
    }

    // Rows: each constraint becomes one equality (two for ranged rows),
    // plus one row per boxed variable.
    struct StdRow
    {
        Index orig;      // original row, or -1 for a bound row
        double rhs;
        int slack_sign;  // 0 none, +1 for <=, -1 for >=
        Index bound_col; // for bound rows
    };
    std::vector<StdRow> srows;
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (!r.range) {
            srows.push_back({Index(i), r.rhs, r.type == 'L' ? 1 : r.type == 'G' ? -1 : 0, -1});
            continue;
        }
        const double R = *r.range;
        double lo = r.rhs;
        double hi = r.rhs;
        if (r.type == 'L') lo = r.rhs - std::abs(R);
        else if (r.type == 'G') hi = r.rhs + std::abs(R);
        else if (R >= 0.0) hi = r.rhs + R;
        else lo = r.rhs + R;
        if (lo == hi) {
            srows.push_back({Index(i), lo, 0, -1});
        } else {
            srows.push_back({Index(i), lo, -1, -1});
            srows.push_back({Index(i), hi, 1, -1});
        }
    }
    for (auto [col, width] : upper_rows) srows.push_back({-1, width, 1, col});

    // Entries of original rows in standard columns, with fixed parts moved to rhs.
    std::vector<std::vector<std::pair<Index, double>>> row_terms(rows.size());
    std::vector<double> row_shift(rows.size(), 0.0);
    Vec c_std = Vec::Zero(nstd + Index(srows.size()));
    double offset = -obj_rhs;
    for (size_t j = 0; j < col_names.size(); ++j) {
        const double cj = maximize ? -obj[j] : obj[j];
        offset += obj[j] * map.shift[j];
        for (const auto& t : map.terms[j]) c_std[t.col] += cj * t.coef;
        for (auto [r, v] : col_entries[j]) {
            row_shift[size_t(r)] += v * map.shift[j];
            for (const auto& t : map.terms[j]) row_terms[size_t(r)].emplace_back(t.col, v * t.coef);
        }
    }
    // offset is kept in the original sense; convert to the minimization form
    out.objective_offset = maximize ? -offset : offset;

    std::vector<Triplet> trips;
    Vec b(Index(srows.size()));
    Index ncols = nstd;
    for (size_t k = 0; k < srows.size(); ++k) {
        const auto& sr = srows[k];
        if (sr.orig >= 0) {
            for (auto [col, v] : row_terms[size_t(sr.orig)]) trips.emplace_back(int(k), int(col), v);
            b[Index(k)] = sr.rhs - row_shift[size_t(sr.orig)];
            out.row_names.push_back(row_names[size_t(sr.orig)]);
        } else {
            trips.emplace_back(int(k), int(sr.bound_col), 1.0);
            b[Index(k)] = sr.rhs;
            out.row_names.push_back("bound_" + std::to_string(sr.bound_col));
        }
        if (sr.slack_sign != 0) trips.emplace_back(int(k), int(ncols++), double(sr.slack_sign));
    }
    if (srows.empty()) throw ParseError("no constraints", lineno);
    SparseMatrix a(Index(srows.size()), ncols);
    a.setFromTriplets(trips.begin(), trips.end());
    a.prune(0.0);
    a.makeCompressed();

    Vec row_nnz = Vec::Zero(a.rows());
    for (Index j = 0; j < a.outerSize(); ++j) {
        if (a.col(j).nonZeros() == 0) {
            throw ParseError("empty column " + std::to_string(j) + " after conversion", lineno);
        }
        for (SparseMatrix::InnerIterator it(a, j); it; ++it) row_nnz[it.row()] += 1.0;
    }
    for (Index i = 0; i < a.rows(); ++i) {
        if (row_nnz[i] == 0.0) throw ParseError("empty row '" + out.row_names[size_t(i)] + "'", lineno);
    }

    out.problem.A = std::move(a);
    out.problem.b = std::move(b);
    out.problem.c = c_std.head(ncols);
    out.problem.cones = {Cone::nonneg(ncols)};
    out.problem.name = name;
    return out;
}

inline MpsProblem read_mps_file(const std::string& path, MpsFormat format = MpsFormat::free)
{
    std::ifstream f(path);
    if (!f) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return read_mps(ss.str(), format);
}

/// Writes an orthant LP  min c'x, A x = b, x >= 0  as free-format MPS.
inline std::string write_mps(const ConicProblem& p)
{
    if (!p.is_lp()) throw std::invalid_argument("write_mps: only orthant problems");
    std::ostringstream os;
    os << std::setprecision(17);
    os << "NAME " << (p.name.empty() ? "LP" : p.name) << "\nROWS\n N obj\n";
    for (Index i = 0; i < p.rows(); ++i) os << " E r" << i << "\n";
    os << "COLUMNS\n";
    for (Index j = 0; j < p.cols(); ++j) {
        if (p.c[j] != 0.0) os << " x" << j << " obj " << p.c[j] << "\n";
        for (SparseMatrix::InnerIterator it(p.A, j); it; ++it) os << " x" << j << " r" << it.row() << " " << it.value() << "\n";
    }
    os << "RHS\n";
    for (Index i = 0; i < p.rows(); ++i) {
        if (p.b[i] != 0.0) os << " rhs r" << i << " " << p.b[i] << "\n";
    }
    os << "ENDATA\n";
    return os.str();
}

} // namespace abip::problems

#endif // ABIP_PROBLEMS_MPS_HPP
