#include "zngauge/scan_table.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace zngauge {

namespace {

std::string real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while(std::getline(ss, field, ',')) out.push_back(field);
    if(!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_real(const std::string &s, std::size_t line) {
    char *end     = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if(s.empty() || *end != '\0') throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

int parse_int(const std::string &s, std::size_t line) {
    const double v = parse_real(s, line);
    if(v != static_cast<int>(v)) throw std::runtime_error("csv line " + std::to_string(line) + ": expected an integer, got '" + s + "'");
    return static_cast<int>(v);
}

std::string strip(std::string s) {
    while(!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
}

}  // namespace

bool ScanRow::same_key(const ScanRow &o) const { return n == o.n && t == o.t && phi == o.phi && L == o.L && m == o.m && chi == o.chi; }

void ScanTable::upsert(ScanRow row) {
    auto it = std::find_if(rows_.begin(), rows_.end(), [&](const ScanRow &r) { return r.same_key(row); });
    if(it == rows_.end()) rows_.push_back(std::move(row));
    else *it = std::move(row);
}

const ScanRow *ScanTable::find(const ScanRow &key) const {
    auto it = std::find_if(rows_.begin(), rows_.end(), [&](const ScanRow &r) { return r.same_key(key); });
    return it == rows_.end() ? nullptr : &*it;
}

std::vector<int> ScanTable::sizes() const {
    std::set<int> s;
    for(const auto &r : rows_) s.insert(r.L);
    return {s.begin(), s.end()};
}

std::vector<ScanRow> ScanTable::at_size(int L) const {
    std::vector<ScanRow> out;
    std::copy_if(rows_.begin(), rows_.end(), std::back_inserter(out), [L](const ScanRow &r) { return r.L == L; });
    std::sort(out.begin(), out.end(), [](const ScanRow &a, const ScanRow &b) { return a.m < b.m; });
    return out;
}

ScanTable ScanTable::select(int n, double t, double phi) const {
    ScanTable out;
    for(const auto &r : rows_)
        if(r.n == n && r.t == t && r.phi == phi) out.rows_.push_back(r);
    return out;
}

void ScanTable::write_csv(std::ostream &os) const {
    os << header << '\n';
    for(const auto &r : rows_)
        os << r.n << ',' << real(r.t) << ',' << real(r.phi) << ',' << r.L << ',' << r.chi << ',' << real(r.m) << ',' << real(r.sigma) << ','
           << real(r.delta) << ',' << real(r.gamma) << ',' << real(r.entropy_half) << ',' << real(r.truncation_error) << ',' << real(r.energy)
           << ',' << r.engine << ',' << (r.converged ? 1 : 0) << ',' << r.provenance << '\n';
}

ScanTable ScanTable::read_csv(std::istream &is) {
    std::string line;
    if(!std::getline(is, line) || strip(line) != header) throw std::runtime_error("csv: missing or unexpected scan table header");
    ScanTable out;
    std::size_t number = 1;
    while(std::getline(is, line)) {
        ++number;
        line = strip(line);
        if(line.empty()) continue;
        const auto f = split(line);
        if(f.size() != 15) throw std::runtime_error("csv line " + std::to_string(number) + ": expected 15 fields");
        ScanRow r;
        r.n                = parse_int(f[0], number);
        r.t                = parse_real(f[1], number);
        r.phi              = parse_real(f[2], number);
        r.L                = parse_int(f[3], number);
        r.chi              = parse_int(f[4], number);
        r.m                = parse_real(f[5], number);
        r.sigma            = parse_real(f[6], number);
        r.delta            = parse_real(f[7], number);
        r.gamma            = parse_real(f[8], number);
        r.entropy_half     = parse_real(f[9], number);
        r.truncation_error = parse_real(f[10], number);
        r.energy           = parse_real(f[11], number);
        r.engine           = f[12];
        r.converged        = parse_int(f[13], number) != 0;
        r.provenance       = f[14];
        out.upsert(std::move(r));
    }
    return out;
}

void write_profiles_csv(std::ostream &os, const std::vector<EntropyProfile> &profiles) {
    os << "L,m,cut,entropy\n";
    for(const auto &p : profiles)
        for(std::size_t c = 0; c < p.entropy.size(); ++c) os << p.L << ',' << real(p.m) << ',' << c << ',' << real(p.entropy[c]) << '\n';
}

std::vector<EntropyProfile> read_profiles_csv(std::istream &is) {
    std::string line;
    if(!std::getline(is, line) || strip(line) != "L,m,cut,entropy") throw std::runtime_error("csv: unexpected entropy profile header");
    std::map<std::pair<int, double>, std::map<int, double>> grouped;
    std::size_t number = 1;
    while(std::getline(is, line)) {
        ++number;
        line = strip(line);
        if(line.empty()) continue;
        const auto f = split(line);
        if(f.size() != 4) throw std::runtime_error("csv line " + std::to_string(number) + ": expected 4 fields");
        grouped[{parse_int(f[0], number), parse_real(f[1], number)}][parse_int(f[2], number)] = parse_real(f[3], number);
    }
    std::vector<EntropyProfile> out;
    for(const auto &[key, cuts] : grouped) {
        EntropyProfile p{key.first, key.second, {}};
        for(const auto &[c, s] : cuts) {
            if(c != static_cast<int>(p.entropy.size())) throw std::runtime_error("csv: entropy profile has missing cuts");
            p.entropy.push_back(s);
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace zngauge
