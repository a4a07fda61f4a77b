#include "zngauge/mps.hpp"

#include "zngauge/link_algebra.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace zngauge {

namespace {

bool present(const Eigen::MatrixXd &m) { return m.size() > 0; }

int sector_dim(const BondSectors &bond, long q) {
    auto it = bond.find(q);
    return it == bond.end() ? 0 : it->second;
}

}  // namespace

MpsState::MpsState(int n, int k0, int cells) : n_(n), k0_(k0) {
    if(n < 2) throw std::invalid_argument("mps: n must be >= 2");
    if(k0 < 0 || k0 >= n) throw std::invalid_argument("mps: boundary label outside [0, n)");
    if(cells < 1) throw std::invalid_argument("mps: need at least one cell");
    bonds_.resize(static_cast<std::size_t>(cells) + 1);
    cells_.resize(static_cast<std::size_t>(cells));
}

int MpsState::bond_dimension(int b) const {
    int d = 0;
    for(const auto &[q, dim] : bond(b)) d += dim;
    return d;
}

int MpsState::max_bond_dimension() const {
    int d = 0;
    for(int b = 0; b <= num_cells(); ++b) d = std::max(d, bond_dimension(b));
    return d;
}

bool MpsState::feasible(int b, long q) const {
    const long reach = std::min(b, num_cells() - b);
    return std::abs(q - k0_) <= reach;
}

MpsState MpsState::product(int n, int k0, Occupation occupation, int cells) {
    MpsState s(n, k0, cells);
    if(filling(occupation) != cells || (occupation >> (2 * cells)) != 0)
        throw std::invalid_argument("mps: product pattern must be half filled and fit the chain");
    const auto flux = reconstruct_flux(occupation, 2 * cells, k0);
    for(int b = 0; b <= cells; ++b) s.bond(b)[flux[static_cast<std::size_t>(2 * b)]] = 1;
    for(int j = 0; j < cells; ++j) {
        const int p = 2 * (occupied(occupation, 2 * j) ? 1 : 0) + (occupied(occupation, 2 * j + 1) ? 1 : 0);
        auto &blocks = s.cell(j).blocks[flux[static_cast<std::size_t>(2 * j)]];
        blocks[static_cast<std::size_t>(p)] = Eigen::MatrixXd::Ones(1, 1);
    }
    return s;
}

MpsState MpsState::random(int n, int k0, int cells, int sector_dim_cap, std::uint64_t seed) {
    MpsState s(n, k0, cells);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for(int b = 0; b <= cells; ++b) {
        const long reach = std::min(b, cells - b);
        for(long q = k0 - reach; q <= k0 + reach; ++q) s.bond(b)[q] = (b == 0 || b == cells) ? 1 : sector_dim_cap;
    }
    for(int j = 0; j < cells; ++j)
        for(const auto &[q, rows] : s.bond(j)) {
            auto &blocks = s.cell(j).blocks[q];
            for(int p = 0; p < cell_physical_dim; ++p) {
                const int cols = sector_dim(s.bond(j + 1), q + cell_charge(p));
                if(cols == 0) continue;
                Eigen::MatrixXd m(rows, cols);
                for(Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = gauss(rng);
                blocks[static_cast<std::size_t>(p)] = m;
            }
        }
    s.right_canonicalize();
    return s;
}

void MpsState::right_canonicalize() {
    const int L = num_cells();
    for(int j = L - 1; j >= 1; --j) {
        struct Factor {
            Eigen::MatrixXd u;
            Eigen::VectorXd s;
            Eigen::MatrixXd vt;
            std::array<Eigen::Index, cell_physical_dim> offset{};
            std::array<Eigen::Index, cell_physical_dim> width{};
        };
        std::map<long, Factor> factors;
        double largest = 0.0;
        for(const auto &[q, blocks] : cell(j).blocks) {
            Factor f;
            Eigen::Index cols = 0;
            for(int p = 0; p < cell_physical_dim; ++p) {
                f.offset[p] = cols;
                f.width[p]  = present(blocks[p]) ? blocks[p].cols() : 0;
                cols += f.width[p];
            }
            const int rows = sector_dim(bond(j), q);
            if(cols == 0 || rows == 0) continue;
            Eigen::MatrixXd m(rows, cols);
            for(int p = 0; p < cell_physical_dim; ++p)
                if(f.width[p] > 0) m.middleCols(f.offset[p], f.width[p]) = blocks[p];
            Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
            f.u  = svd.matrixU();
            f.s  = svd.singularValues();
            f.vt = svd.matrixV().transpose();
            if(f.s.size() > 0) largest = std::max(largest, f.s[0]);
            factors.emplace(q, std::move(f));
        }
        if(largest == 0.0) throw std::runtime_error("mps: state has zero norm");

        BondSectors fresh;
        std::map<long, Eigen::MatrixXd> carry;
        CellTensor updated;
        for(auto &[q, f] : factors) {
            Eigen::Index rank = 0;
            while(rank < f.s.size() && f.s[rank] > 1e-14 * largest) ++rank;
            if(rank == 0) continue;
            fresh[q]     = static_cast<int>(rank);
            auto &blocks = updated.blocks[q];
            for(int p = 0; p < cell_physical_dim; ++p)
                if(f.width[p] > 0) blocks[p] = f.vt.topRows(rank).middleCols(f.offset[p], f.width[p]);
            carry[q] = f.u.leftCols(rank) * f.s.head(rank).asDiagonal();
        }
        cell(j)  = std::move(updated);
        bond(j)  = std::move(fresh);
        for(auto &[q, blocks] : cell(j - 1).blocks)
            for(int p = 0; p < cell_physical_dim; ++p) {
                if(!present(blocks[p])) continue;
                auto it = carry.find(q + cell_charge(p));
                if(it == carry.end()) blocks[p].resize(0, 0);
                else blocks[p] = (blocks[p] * it->second).eval();
            }
    }
    double norm2 = 0.0;
    for(const auto &[q, blocks] : cell(0).blocks)
        for(const auto &b : blocks)
            if(present(b)) norm2 += b.squaredNorm();
    if(norm2 == 0.0) throw std::runtime_error("mps: state has zero norm");
    const double scale = 1.0 / std::sqrt(norm2);
    for(auto &[q, blocks] : cell(0).blocks)
        for(auto &b : blocks)
            if(present(b)) b *= scale;
    center_ = 0;
}

double MpsState::norm() const { return std::sqrt(std::max(0.0, overlap(*this, *this))); }

bool MpsState::left_orthonormal(int j, double tol) const {
    std::map<long, Eigen::MatrixXd> gram;
    for(const auto &[q, blocks] : cell(j).blocks)
        for(int p = 0; p < cell_physical_dim; ++p) {
            if(!present(blocks[p])) continue;
            const long qr = q + cell_charge(p);
            auto &g       = gram[qr];
            if(g.size() == 0) g = Eigen::MatrixXd::Zero(blocks[p].cols(), blocks[p].cols());
            g += blocks[p].transpose() * blocks[p];
        }
    for(const auto &[q, dim] : bond(j + 1)) {
        auto it = gram.find(q);
        if(it == gram.end() || (it->second - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
}

bool MpsState::right_orthonormal(int j, double tol) const {
    for(const auto &[q, dim] : bond(j)) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
        auto it           = cell(j).blocks.find(q);
        if(it == cell(j).blocks.end()) return false;
        for(const auto &b : it->second)
            if(present(b)) g += b * b.transpose();
        if((g - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
}

void MpsState::check_structure() const {
    const int L = num_cells();
    if(bond(0) != BondSectors{{k0_, 1}} || bond(L) != BondSectors{{k0_, 1}})
        throw std::logic_error("mps: boundary bonds must carry the single sector k0");
    for(int j = 0; j < L; ++j)
        for(const auto &[q, blocks] : cell(j).blocks) {
            const int rows = sector_dim(bond(j), q);
            for(int p = 0; p < cell_physical_dim; ++p) {
                if(!present(blocks[p])) continue;
                const int cols = sector_dim(bond(j + 1), q + cell_charge(p));
                if(blocks[p].rows() != rows || blocks[p].cols() != cols || rows == 0 || cols == 0)
                    throw std::logic_error("mps: block shape disagrees with bond sectors at cell " + std::to_string(j));
            }
        }
}

double MpsState::amplitude(const GaugeState &state) const {
    const int L = num_cells();
    if(state.k0 != k0_ || (state.occupation >> (2 * L)) != 0) return 0.0;
    const auto flux = reconstruct_flux(state.occupation, 2 * L, state.k0);
    if(flux.back() != k0_) return 0.0;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, 1);
    for(int j = 0; j < L; ++j) {
        const int p = 2 * (occupied(state.occupation, 2 * j) ? 1 : 0) + (occupied(state.occupation, 2 * j + 1) ? 1 : 0);
        auto it     = cell(j).blocks.find(flux[static_cast<std::size_t>(2 * j)]);
        if(it == cell(j).blocks.end() || !present(it->second[p])) return 0.0;
        acc = (acc * it->second[p]).eval();
    }
    return acc(0, 0);
}

Eigen::VectorXd MpsState::expand(std::span<const GaugeState> basis) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(basis.size()));
    for(std::size_t i = 0; i < basis.size(); ++i) v[static_cast<Eigen::Index>(i)] = amplitude(basis[i]);
    return v;
}

double overlap(const MpsState &a, const MpsState &b) {
    if(a.order() != b.order() || a.k0() != b.k0() || a.num_cells() != b.num_cells())
        throw std::invalid_argument("overlap: states live in different sectors");
    std::map<long, Eigen::MatrixXd> env{{a.k0(), Eigen::MatrixXd::Ones(1, 1)}};
    for(int j = 0; j < a.num_cells(); ++j) {
        std::map<long, Eigen::MatrixXd> next;
        for(const auto &[q, e] : env) {
            auto ia = a.cell(j).blocks.find(q);
            auto ib = b.cell(j).blocks.find(q);
            if(ia == a.cell(j).blocks.end() || ib == b.cell(j).blocks.end()) continue;
            for(int p = 0; p < cell_physical_dim; ++p) {
                const auto &ma = ia->second[p];
                const auto &mb = ib->second[p];
                if(!present(ma) || !present(mb)) continue;
                Eigen::MatrixXd contrib = ma.transpose() * e * mb;
                auto &slot              = next[q + cell_charge(p)];
                if(slot.size() == 0) slot = std::move(contrib);
                else slot += contrib;
            }
        }
        env = std::move(next);
    }
    auto it = env.find(a.k0());
    return it == env.end() ? 0.0 : it->second(0, 0);
}

double schmidt_entropy(std::span<const double> singular_values) {
    double total = 0.0;
    for(double s : singular_values) total += s * s;
    if(total <= 0.0) return 0.0;
    double h = 0.0;
    for(double s : singular_values) {
        const double w = s * s / total;
        if(w > 0.0) h -= w * std::log2(w);
    }
    return std::max(0.0, h);
}

MpsMeasurement measure(const MpsState &input, double phi) {
    MpsState state = input;
    state.right_canonicalize();
    const int L = state.num_cells();
    const int n = state.order();

    MpsMeasurement out;
    out.density.assign(static_cast<std::size_t>(2 * L), 0.0);
    out.field_tilde.assign(static_cast<std::size_t>(2 * L - 1), 0.0);
    out.entropy.assign(static_cast<std::size_t>(2 * L + 1), 0.0);

    for(int j = 0; j < L; ++j) {
        const auto &center = state.cell(j).blocks;
        std::vector<double> values;

        // weights, local fields and the cut inside the cell
        std::map<long, std::vector<std::pair<long, int>>> by_mid;  // q_mid -> (q_left, occ_even)
        for(const auto &[q, blocks] : center)
            for(int p = 0; p < cell_physical_dim; ++p) {
                if(!present(blocks[p])) continue;
                const double w = blocks[p].squaredNorm();
                const int e    = cell_occ_even(p);
                const int o    = cell_occ_odd(p);
                out.density[static_cast<std::size_t>(2 * j)] += e * w;
                out.density[static_cast<std::size_t>(2 * j + 1)] += o * w;
                out.field_tilde[static_cast<std::size_t>(2 * j)] += w * tilde_field(n, phi, q + e);
                if(j + 1 < L) out.field_tilde[static_cast<std::size_t>(2 * j + 1)] += w * tilde_field(n, phi, q + cell_charge(p));
            }
        for(const auto &[q, dim] : state.bond(j))
            for(int e = 0; e < 2; ++e) by_mid[q + e].push_back({q, e});
        for(const auto &[qm, rows_of] : by_mid) {
            Eigen::Index rows = 0;
            for(const auto &[ql, e] : rows_of) rows += sector_dim(state.bond(j), ql);
            const int c0 = sector_dim(state.bond(j + 1), qm - 1);
            const int c1 = sector_dim(state.bond(j + 1), qm);
            if(rows == 0 || c0 + c1 == 0) continue;
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, c0 + c1);
            Eigen::Index r    = 0;
            for(const auto &[ql, e] : rows_of) {
                const int d = sector_dim(state.bond(j), ql);
                auto it     = center.find(ql);
                if(it != center.end()) {
                    const auto &b0 = it->second[static_cast<std::size_t>(2 * e)];
                    const auto &b1 = it->second[static_cast<std::size_t>(2 * e + 1)];
                    if(present(b0)) m.block(r, 0, d, c0) = b0;
                    if(present(b1)) m.block(r, c0, d, c1) = b1;
                }
                r += d;
            }
            const Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues();
            values.insert(values.end(), s.data(), s.data() + s.size());
        }
        out.entropy[static_cast<std::size_t>(2 * j + 1)] = schmidt_entropy(values);
        if(j + 1 == L) break;

        // cell-boundary cut; shift the centre one cell to the right
        values.clear();
        std::map<long, Eigen::MatrixXd> carry;
        CellTensor left;
        for(const auto &[qr, cols] : state.bond(j + 1)) {
            std::vector<std::pair<long, int>> parts;
            Eigen::Index rows = 0;
            for(int p = 0; p < cell_physical_dim; ++p) {
                const long ql = qr - cell_charge(p);
                auto it       = center.find(ql);
                if(it == center.end() || !present(it->second[p])) continue;
                parts.push_back({ql, p});
                rows += it->second[p].rows();
            }
            if(rows == 0) continue;
            Eigen::MatrixXd m(rows, cols);
            Eigen::Index r = 0;
            for(const auto &[ql, p] : parts) {
                const auto &b = center.at(ql)[static_cast<std::size_t>(p)];
                m.middleRows(r, b.rows()) = b;
                r += b.rows();
            }
            Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const Eigen::VectorXd s = svd.singularValues();
            values.insert(values.end(), s.data(), s.data() + s.size());
            carry[qr] = s.asDiagonal() * svd.matrixV().transpose();
        }
        out.entropy[static_cast<std::size_t>(2 * j + 2)] = schmidt_entropy(values);
        auto &next = state.cell(j + 1).blocks;
        for(auto &[q, blocks] : next) {
            auto it = carry.find(q);
            for(auto &b : blocks) {
                if(!present(b)) continue;
                if(it == carry.end()) b.resize(0, 0);
                else b = (it->second * b).eval();
            }
        }
        // the new centre rows carry rank(q) states, update the bond accordingly
        for(auto &[q, m] : carry) state.bond(j + 1)[q] = static_cast<int>(m.rows());
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char *checkpoint_magic = "zngauge-mps";
constexpr int checkpoint_version       = 1;

std::string hex(double v) {
    std::ostringstream os;
    os << std::hexfloat << v;
    return os.str();
}

double read_real(std::istream &is) {
    std::string token;
    if(!(is >> token)) throw std::runtime_error("checkpoint: unexpected end of input");
    char *end      = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if(end == token.c_str() || *end != '\0') throw std::runtime_error("checkpoint: bad real '" + token + "'");
    return v;
}

template <class T>
T read_value(std::istream &is, const char *what) {
    T v{};
    if(!(is >> v)) throw std::runtime_error(std::string("checkpoint: cannot read ") + what);
    return v;
}

void expect(std::istream &is, const std::string &word) {
    std::string token;
    if(!(is >> token) || token != word) throw std::runtime_error("checkpoint: expected '" + word + "', got '" + token + "'");
}

}  // namespace

void save_checkpoint(std::ostream &os, const MpsState &state, const ModelParams &params) {
    os << checkpoint_magic << ' ' << checkpoint_version << '\n';
    os << "params " << params.n << ' ' << hex(params.t) << ' ' << hex(params.m) << ' ' << hex(params.phi) << ' '
       << params.geometry.pairs << ' ' << params.k0 << '\n';
    os << "state " << state.order() << ' ' << state.k0() << ' ' << state.num_cells() << ' ' << state.center() << '\n';
    for(int b = 0; b <= state.num_cells(); ++b) {
        os << "bond " << b << ' ' << state.bond(b).size();
        for(const auto &[q, d] : state.bond(b)) os << ' ' << q << ' ' << d;
        os << '\n';
    }
    for(int j = 0; j < state.num_cells(); ++j) {
        std::size_t count = 0;
        for(const auto &[q, blocks] : state.cell(j).blocks)
            for(const auto &b : blocks) count += present(b) ? 1 : 0;
        os << "cell " << j << ' ' << count << '\n';
        for(const auto &[q, blocks] : state.cell(j).blocks)
            for(int p = 0; p < cell_physical_dim; ++p) {
                const auto &b = blocks[static_cast<std::size_t>(p)];
                if(!present(b)) continue;
                os << "block " << q << ' ' << p << ' ' << b.rows() << ' ' << b.cols() << '\n';
                for(Eigen::Index r = 0; r < b.rows(); ++r) {
                    for(Eigen::Index c = 0; c < b.cols(); ++c) os << (c ? " " : "") << hex(b(r, c));
                    os << '\n';
                }
            }
    }
    os << "history " << state.history.size() << '\n';
    for(const auto &h : state.history)
        os << h.sweep << ' ' << hex(h.energy) << ' ' << hex(h.max_truncation) << ' ' << h.max_bond << ' ' << hex(h.seconds) << '\n';
    os << "end\n";
}

MpsState load_checkpoint(std::istream &is, ModelParams *params) {
    expect(is, checkpoint_magic);
    if(read_value<int>(is, "version") != checkpoint_version) throw std::runtime_error("checkpoint: unsupported version");
    expect(is, "params");
    ModelParams p;
    p.n              = read_value<int>(is, "n");
    p.t              = read_real(is);
    p.m              = read_real(is);
    p.phi            = read_real(is);
    p.geometry.pairs = read_value<int>(is, "pairs");
    p.k0             = read_value<int>(is, "k0");
    if(params) *params = p;

    expect(is, "state");
    const int n      = read_value<int>(is, "n");
    const int k0     = read_value<int>(is, "k0");
    const int cells  = read_value<int>(is, "cells");
    const int center = read_value<int>(is, "center");
    MpsState state(n, k0, cells);
    state.set_center(center);
    for(int b = 0; b <= cells; ++b) {
        expect(is, "bond");
        if(read_value<int>(is, "bond index") != b) throw std::runtime_error("checkpoint: bonds out of order");
        const auto count = read_value<std::size_t>(is, "sector count");
        for(std::size_t i = 0; i < count; ++i) {
            const long q           = read_value<long>(is, "flux");
            state.bond(b)[q]       = read_value<int>(is, "sector dimension");
        }
    }
    for(int j = 0; j < cells; ++j) {
        expect(is, "cell");
        if(read_value<int>(is, "cell index") != j) throw std::runtime_error("checkpoint: cells out of order");
        const auto count = read_value<std::size_t>(is, "block count");
        for(std::size_t i = 0; i < count; ++i) {
            expect(is, "block");
            const long q    = read_value<long>(is, "flux");
            const int p     = read_value<int>(is, "physical index");
            const auto rows = read_value<Eigen::Index>(is, "rows");
            const auto cols = read_value<Eigen::Index>(is, "cols");
            if(p < 0 || p >= cell_physical_dim || rows < 1 || cols < 1) throw std::runtime_error("checkpoint: bad block header");
            Eigen::MatrixXd m(rows, cols);
            for(Eigen::Index r = 0; r < rows; ++r)
                for(Eigen::Index c = 0; c < cols; ++c) m(r, c) = read_real(is);
            state.cell(j).blocks[q][static_cast<std::size_t>(p)] = std::move(m);
        }
    }
    expect(is, "history");
    const auto entries = read_value<std::size_t>(is, "history size");
    for(std::size_t i = 0; i < entries; ++i) {
        SweepRecord h;
        h.sweep          = read_value<int>(is, "sweep");
        h.energy         = read_real(is);
        h.max_truncation = read_real(is);
        h.max_bond       = read_value<int>(is, "bond");
        h.seconds        = read_real(is);
        state.history.push_back(h);
    }
    expect(is, "end");
    state.check_structure();
    return state;
}

}  // namespace zngauge
