#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace zngauge {

/// One solved (model, size, mass) point. delta and gamma are energy-density
/// gaps; NaN when the run computed a single level.
struct ScanRow {
    int n = 0;
    double t = 0.0;
    double phi = 0.0;
    int L = 0;  ///< physical sites (pairs); the chain has N = 2L staggered sites
    int chi = 0;
    double m = 0.0;
    double sigma = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double entropy_half = 0.0;
    double truncation_error = 0.0;
    double energy = 0.0;
    std::string engine;
    bool converged = false;
    std::string provenance;

    int sites() const { return 2 * L; }
    bool same_key(const ScanRow &other) const;
};

/// Rows keyed by (n, t, phi, L, m, chi). Insertion replaces a row with the
/// same key, so the key stays unique.
class ScanTable {
public:
    static constexpr const char *header =
        "n,t,phi,L,chi,m,sigma,delta,gamma,entropy_half,truncation_error,energy,engine,converged,provenance";

    void upsert(ScanRow row);
    const ScanRow *find(const ScanRow &key) const;
    const std::vector<ScanRow> &rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }
    std::size_t size() const { return rows_.size(); }

    /// Distinct sizes in ascending order.
    std::vector<int> sizes() const;
    /// Rows of one size sorted by m.
    std::vector<ScanRow> at_size(int L) const;
    /// Rows matching (n, t, phi) exactly.
    ScanTable select(int n, double t, double phi) const;

    /// Reals printed with 17 significant digits, so write/read is exact.
    void write_csv(std::ostream &os) const;
    /// Throws std::runtime_error naming the line on malformed input.
    static ScanTable read_csv(std::istream &is);

private:
    std::vector<ScanRow> rows_;
};

/// Per-cut entropy of one point, kept next to the table for flatness checks.
struct EntropyProfile {
    int L = 0;
    double m = 0.0;
    std::vector<double> entropy;  ///< bits, cuts 0..N
};

void write_profiles_csv(std::ostream &os, const std::vector<EntropyProfile> &profiles);
std::vector<EntropyProfile> read_profiles_csv(std::istream &is);

}  // namespace zngauge
