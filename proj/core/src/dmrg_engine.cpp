#include "zngauge/dmrg_engine.hpp"

#include "zngauge/lanczos.hpp"
#include "zngauge/link_algebra.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace zngauge {

namespace {

using Blocks = std::map<long, Eigen::MatrixXd>;

bool present(const Eigen::MatrixXd &m) { return m.size() > 0; }

void accumulate(Blocks &target, long q, Eigen::MatrixXd contrib) {
    auto it = target.find(q);
    if(it == target.end()) target.emplace(q, std::move(contrib));
    else it->second += contrib;
}

const Eigen::MatrixXd *find_block(const Blocks &blocks, long q) {
    auto it = blocks.find(q);
    return it == blocks.end() ? nullptr : &it->second;
}

const Eigen::MatrixXd *find_cell_block(const CellTensor &t, long q, int p) {
    auto it = t.blocks.find(q);
    if(it == t.blocks.end() || !present(it->second[static_cast<std::size_t>(p)])) return nullptr;
    return &it->second[static_cast<std::size_t>(p)];
}

int sector_dim(const BondSectors &bond, long q) {
    auto it = bond.find(q);
    return it == bond.end() ? 0 : it->second;
}

// ----- MPO in (label, physical index) form --------------------------------

using Transitions = std::vector<std::pair<int, double>>;

struct SiteTerm {
    int left;
    int right;
    std::vector<std::array<Transitions, cell_physical_dim>> by_label;  // [k_left][p] -> (p', value)
};

std::vector<std::vector<SiteTerm>> site_terms(const Mpo &mpo, const PairCellBasis &cells) {
    std::vector<std::vector<SiteTerm>> out(mpo.sites.size());
    for(std::size_t j = 0; j < mpo.sites.size(); ++j)
        for(const auto &entry : mpo.sites[j]) {
            SiteTerm term{entry.left, entry.right, std::vector<std::array<Transitions, cell_physical_dim>>(static_cast<std::size_t>(mpo.n))};
            for(int s = 0; s < cells.size(); ++s) {
                const auto &c = cells[s];
                const int p   = 2 * c.occ_even + c.occ_odd;
                for(const auto &tr : entry.op.from(s)) {
                    const auto &d = cells[tr.to];
                    term.by_label[static_cast<std::size_t>(c.k_left)][static_cast<std::size_t>(p)].push_back({2 * d.occ_even + d.occ_odd, tr.value});
                }
            }
            out[j].push_back(std::move(term));
        }
    return out;
}

// Two-cell operator per (left channel, right channel): [k_left][4 p1 + p2] -> (4 p1' + p2', value)
using PairTable = std::vector<std::array<Transitions, 16>>;

std::map<std::pair<int, int>, PairTable> pair_terms(const std::vector<SiteTerm> &first, const std::vector<SiteTerm> &second, int n) {
    std::map<std::pair<int, int>, PairTable> out;
    for(const auto &t1 : first)
        for(const auto &t2 : second) {
            if(t1.right != t2.left) continue;
            auto &table = out[{t1.left, t2.right}];
            if(table.empty()) table.resize(static_cast<std::size_t>(n));
            for(int k = 0; k < n; ++k)
                for(int p1 = 0; p1 < cell_physical_dim; ++p1) {
                    const int k_mid = wrap_label(k + cell_charge(p1), n);
                    for(const auto &[q1, v1] : t1.by_label[static_cast<std::size_t>(k)][static_cast<std::size_t>(p1)])
                        for(int p2 = 0; p2 < cell_physical_dim; ++p2)
                            for(const auto &[q2, v2] : t2.by_label[static_cast<std::size_t>(k_mid)][static_cast<std::size_t>(p2)]) {
                                auto &list   = table[static_cast<std::size_t>(k)][static_cast<std::size_t>(4 * p1 + p2)];
                                const int to = 4 * q1 + q2;
                                auto it      = std::find_if(list.begin(), list.end(), [to](const auto &e) { return e.first == to; });
                                if(it == list.end()) list.push_back({to, v1 * v2});
                                else it->second += v1 * v2;
                            }
                }
        }
    return out;
}

// Environments: left channel 0 and right channel 3 are identities and not stored.
struct Env {
    std::array<Blocks, Mpo::channels> ch;
};

Env extend_left(const Env &env, const CellTensor &a, const std::vector<SiteTerm> &terms, int n) {
    Env out;
    for(const auto &term : terms) {
        if(term.right == Mpo::start) continue;
        const int qa = Mpo::channel_charge[static_cast<std::size_t>(term.left)];
        for(const auto &[q, blocks] : a.blocks) {
            const Eigen::MatrixXd *e = nullptr;
            if(term.left != Mpo::start) {
                e = find_block(env.ch[static_cast<std::size_t>(term.left)], q);
                if(!e) continue;
            }
            const int k = wrap_label(q, n);
            for(int p = 0; p < cell_physical_dim; ++p) {
                const auto &ket = blocks[static_cast<std::size_t>(p)];
                if(!present(ket)) continue;
                const auto &list = term.by_label[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)];
                if(list.empty()) continue;
                const Eigen::MatrixXd ek = e ? Eigen::MatrixXd((*e) * ket) : ket;
                for(const auto &[pp, value] : list) {
                    const Eigen::MatrixXd *bra = find_cell_block(a, q + qa, pp);
                    if(!bra) continue;
                    accumulate(out.ch[static_cast<std::size_t>(term.right)], q + cell_charge(p), value * bra->transpose() * ek);
                }
            }
        }
    }
    return out;
}

Env extend_right(const Env &env, const CellTensor &b, const std::vector<SiteTerm> &terms, int n) {
    Env out;
    for(const auto &term : terms) {
        if(term.left == Mpo::finish) continue;
        const int qa = Mpo::channel_charge[static_cast<std::size_t>(term.left)];
        for(const auto &[q, blocks] : b.blocks) {
            const int k = wrap_label(q, n);
            for(int p = 0; p < cell_physical_dim; ++p) {
                const auto &ket = blocks[static_cast<std::size_t>(p)];
                if(!present(ket)) continue;
                const auto &list = term.by_label[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)];
                if(list.empty()) continue;
                const long qr            = q + cell_charge(p);
                const Eigen::MatrixXd *e = nullptr;
                if(term.right != Mpo::finish) {
                    e = find_block(env.ch[static_cast<std::size_t>(term.right)], qr);
                    if(!e) continue;
                }
                const Eigen::MatrixXd ek = e ? Eigen::MatrixXd((*e) * ket.transpose()) : Eigen::MatrixXd(ket.transpose());
                for(const auto &[pp, value] : list) {
                    const Eigen::MatrixXd *bra = find_cell_block(b, q + qa, pp);
                    if(!bra) continue;
                    accumulate(out.ch[static_cast<std::size_t>(term.left)], q, value * (*bra) * ek);
                }
            }
        }
    }
    return out;
}

// overlap environments <phi|psi>, keyed by flux: dim_phi(q) x dim_psi(q)
Blocks overlap_left(const Blocks &env, const CellTensor &phi, const CellTensor &psi) {
    Blocks out;
    for(const auto &[q, e] : env)
        for(int p = 0; p < cell_physical_dim; ++p) {
            const auto *f = find_cell_block(phi, q, p);
            const auto *s = find_cell_block(psi, q, p);
            if(f && s) accumulate(out, q + cell_charge(p), f->transpose() * e * (*s));
        }
    return out;
}

Blocks overlap_right(const Blocks &env, const CellTensor &phi, const CellTensor &psi) {
    Blocks out;
    for(const auto &[q, blocks] : psi.blocks)
        for(int p = 0; p < cell_physical_dim; ++p) {
            const auto *s = find_cell_block(psi, q, p);
            const auto *f = find_cell_block(phi, q, p);
            const auto *e = find_block(env, q + cell_charge(p));
            if(f && s && e) accumulate(out, q, (*f) * (*e) * s->transpose());
        }
    return out;
}

// ----- two-site centre -------------------------------------------------------

struct Layout {
    struct Block {
        long ql;
        int p1;
        int p2;
        Eigen::Index rows;
        Eigen::Index cols;
        Eigen::Index offset;
        long qm() const { return ql + cell_charge(p1); }
        long qr() const { return ql + cell_charge(p1) + cell_charge(p2); }
    };
    std::vector<Block> blocks;
    std::map<std::tuple<long, int, int>, int> index;
    Eigen::Index size = 0;

    int find(long ql, int p1, int p2) const {
        auto it = index.find({ql, p1, p2});
        return it == index.end() ? -1 : it->second;
    }
};

Layout make_layout(const BondSectors &left, const BondSectors &right) {
    Layout lay;
    for(const auto &[ql, rows] : left)
        for(int p1 = 0; p1 < cell_physical_dim; ++p1)
            for(int p2 = 0; p2 < cell_physical_dim; ++p2) {
                const long qr  = ql + cell_charge(p1) + cell_charge(p2);
                const int cols = sector_dim(right, qr);
                if(cols == 0 || rows == 0) continue;
                lay.index[{ql, p1, p2}] = static_cast<int>(lay.blocks.size());
                lay.blocks.push_back({ql, p1, p2, rows, cols, lay.size});
                lay.size += static_cast<Eigen::Index>(rows) * cols;
            }
    return lay;
}

using BlockView  = Eigen::Map<Eigen::MatrixXd>;
using CBlockView = Eigen::Map<const Eigen::MatrixXd>;

Eigen::VectorXd contract_pair(const Layout &lay, const CellTensor &a, const CellTensor &b) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(lay.size);
    for(const auto &blk : lay.blocks) {
        const auto *x = find_cell_block(a, blk.ql, blk.p1);
        const auto *y = find_cell_block(b, blk.qm(), blk.p2);
        if(!x || !y) continue;
        BlockView(theta.data() + blk.offset, blk.rows, blk.cols) = (*x) * (*y);
    }
    return theta;
}

class EffectiveHamiltonian {
public:
    EffectiveHamiltonian(const Layout &lay, const Env &left, const Env &right, const std::map<std::pair<int, int>, PairTable> &pairs, int n)
        : lay_(lay) {
        for(const auto &[channels, table] : pairs) {
            const auto [a, c] = channels;
            const int qa      = Mpo::channel_charge[static_cast<std::size_t>(a)];
            for(int src = 0; src < static_cast<int>(lay.blocks.size()); ++src) {
                const auto &blk = lay.blocks[static_cast<std::size_t>(src)];
                const auto &list =
                    table[static_cast<std::size_t>(wrap_label(blk.ql, n))][static_cast<std::size_t>(4 * blk.p1 + blk.p2)];
                if(list.empty()) continue;
                Term term;
                term.src = src;
                if(a != Mpo::start) {
                    term.left = find_block(left.ch[static_cast<std::size_t>(a)], blk.ql);
                    if(!term.left) continue;
                }
                if(c != Mpo::finish) {
                    term.right = find_block(right.ch[static_cast<std::size_t>(c)], blk.qr());
                    if(!term.right) continue;
                }
                for(const auto &[to, value] : list) {
                    const int tgt = lay.find(blk.ql + qa, to / 4, to % 4);
                    if(tgt < 0) continue;
                    term.targets.push_back({tgt, value});
                }
                if(!term.targets.empty()) terms_.push_back(std::move(term));
            }
        }
    }

    void apply(const Eigen::VectorXd &x, Eigen::VectorXd &y) const {
        y.setZero(x.size());
        Eigen::MatrixXd tmp;
        for(const auto &term : terms_) {
            const auto &s = lay_.blocks[static_cast<std::size_t>(term.src)];
            CBlockView X(x.data() + s.offset, s.rows, s.cols);
            const Eigen::MatrixXd *result = nullptr;
            if(term.left) tmp.noalias() = (*term.left) * X;
            else if(term.right) tmp.noalias() = X * term.right->transpose();
            if(term.left || term.right) result = &tmp;
            for(const auto &[tgt, value] : term.targets) {
                const auto &t = lay_.blocks[static_cast<std::size_t>(tgt)];
                BlockView Y(y.data() + t.offset, t.rows, t.cols);
                if(result) Y += value * (*result);
                else Y += value * X;
            }
        }
    }

private:
    struct Term {
        int src = 0;
        const Eigen::MatrixXd *left = nullptr;
        const Eigen::MatrixXd *right = nullptr;
        std::vector<std::pair<int, double>> targets;
    };
    const Layout &lay_;
    std::vector<Term> terms_;
};

// projection of a lower state onto the two-site space: <phi|psi> = v . theta
Eigen::VectorXd projected_vector(const Layout &lay, const Blocks &lo, const Blocks &ro, const CellTensor &phi1, const CellTensor &phi2) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(lay.size);
    for(const auto &blk : lay.blocks) {
        const auto *l  = find_block(lo, blk.ql);
        const auto *r  = find_block(ro, blk.qr());
        const auto *f1 = find_cell_block(phi1, blk.ql, blk.p1);
        const auto *f2 = find_cell_block(phi2, blk.qm(), blk.p2);
        if(!l || !r || !f1 || !f2) continue;
        BlockView(v.data() + blk.offset, blk.rows, blk.cols) = l->transpose() * (*f1) * (*f2) * (*r);
    }
    return v;
}

struct Split {
    CellTensor left;
    CellTensor right;
    BondSectors middle;
    double discarded = 0.0;
};

// SVD of the centre per middle flux; the singular values go left or right
Split split_pair(const Layout &lay, const Eigen::VectorXd &theta, const BondSectors &left_bond, const BondSectors &right_bond,
                 bool move_right, const SweepPolicy &policy) {
    struct Sector {
        std::vector<std::pair<long, int>> rows;  // (ql, p1)
        std::vector<std::pair<int, long>> cols;  // (p2, qr)
        Eigen::MatrixXd u, vt;
        Eigen::VectorXd s;
    };
    std::map<long, Sector> sectors;
    for(const auto &[ql, d] : left_bond)
        for(int p1 = 0; p1 < cell_physical_dim; ++p1) sectors[ql + cell_charge(p1)].rows.push_back({ql, p1});
    for(auto &[qm, sec] : sectors)
        for(int p2 = 0; p2 < cell_physical_dim; ++p2)
            if(sector_dim(right_bond, qm + cell_charge(p2)) > 0) sec.cols.push_back({p2, qm + cell_charge(p2)});

    std::vector<std::pair<double, long>> all;
    for(auto it = sectors.begin(); it != sectors.end();) {
        auto &sec = it->second;
        Eigen::Index rows = 0, cols = 0;
        for(const auto &[ql, p1] : sec.rows) rows += sector_dim(left_bond, ql);
        for(const auto &[p2, qr] : sec.cols) cols += sector_dim(right_bond, qr);
        if(rows == 0 || cols == 0) {
            it = sectors.erase(it);
            continue;
        }
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
        Eigen::Index r    = 0;
        for(const auto &[ql, p1] : sec.rows) {
            const int dr   = sector_dim(left_bond, ql);
            Eigen::Index c = 0;
            for(const auto &[p2, qr] : sec.cols) {
                const int dc  = sector_dim(right_bond, qr);
                const int idx = lay.find(ql, p1, p2);
                if(idx >= 0) {
                    const auto &blk = lay.blocks[static_cast<std::size_t>(idx)];
                    m.block(r, c, dr, dc) = CBlockView(theta.data() + blk.offset, blk.rows, blk.cols);
                }
                c += dc;
            }
            r += dr;
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        sec.u  = svd.matrixU();
        sec.s  = svd.singularValues();
        sec.vt = svd.matrixV().transpose();
        for(Eigen::Index i = 0; i < sec.s.size(); ++i) all.push_back({sec.s[i], it->first});
        ++it;
    }
    std::sort(all.begin(), all.end(), [](const auto &a, const auto &b) { return a.first > b.first; });
    double total = 0.0;
    for(const auto &[s, q] : all) total += s * s;
    if(total <= 0.0) throw std::runtime_error("dmrg: two-site centre vanished");

    // fewest states whose discarded weight stays below the cutoff, capped by chi
    std::size_t keep = all.size();
    double tail      = 0.0;
    while(keep > 1) {
        const double w = all[keep - 1].first * all[keep - 1].first;
        if((tail + w) / total > policy.cutoff) break;
        tail += w;
        --keep;
    }
    keep = std::min<std::size_t>(keep, static_cast<std::size_t>(std::max(1, policy.chi)));
    double kept_weight = 0.0;
    std::map<long, int> kept;
    for(std::size_t i = 0; i < keep; ++i) {
        ++kept[all[i].second];
        kept_weight += all[i].first * all[i].first;
    }

    Split out;
    out.discarded      = std::max(0.0, 1.0 - kept_weight / total);
    const double scale = 1.0 / std::sqrt(kept_weight);
    for(auto &[qm, sec] : sectors) {
        auto kt = kept.find(qm);
        if(kt == kept.end()) continue;
        const int k   = kt->second;
        out.middle[qm] = k;
        Eigen::MatrixXd u        = sec.u.leftCols(k);
        Eigen::MatrixXd vt       = sec.vt.topRows(k);
        const Eigen::VectorXd sv = sec.s.head(k) * scale;
        if(move_right) vt = sv.asDiagonal() * vt;
        else u = u * sv.asDiagonal();
        Eigen::Index r = 0;
        for(const auto &[ql, p1] : sec.rows) {
            const int dr = sector_dim(left_bond, ql);
            out.left.blocks[ql][static_cast<std::size_t>(p1)] = u.middleRows(r, dr);
            r += dr;
        }
        Eigen::Index c = 0;
        for(const auto &[p2, qr] : sec.cols) {
            const int dc = sector_dim(right_bond, qr);
            out.right.blocks[qm][static_cast<std::size_t>(p2)] = vt.middleCols(c, dc);
            c += dc;
        }
    }
    // drop empty left sectors so every stored key has at least one block
    for(auto it = out.left.blocks.begin(); it != out.left.blocks.end();) {
        const bool any = std::any_of(it->second.begin(), it->second.end(), [](const auto &m) { return m.size() > 0; });
        it             = any ? std::next(it) : out.left.blocks.erase(it);
    }
    return out;
}

class Sweeper {
public:
    Sweeper(const ModelParams &params, const SweepPolicy &policy, MpsState psi, std::vector<const MpsState *> lower)
        : params_(params), policy_(policy), cells_(params.n), psi_(std::move(psi)), lower_(std::move(lower)) {
        const int L = psi_.num_cells();
        if(L < 2) throw std::invalid_argument("dmrg: needs at least two cells");
        terms_ = site_terms(build_mpo(params, cells_), cells_);
        for(int j = 0; j + 1 < L; ++j) pairs_.push_back(pair_terms(terms_[static_cast<std::size_t>(j)], terms_[static_cast<std::size_t>(j) + 1], params.n));

        psi_.right_canonicalize();
        left_.assign(static_cast<std::size_t>(L) + 1, Env{});
        right_.assign(static_cast<std::size_t>(L) + 1, Env{});
        for(int b = L - 1; b >= 2; --b) right_[static_cast<std::size_t>(b)] = extend_right(right_[static_cast<std::size_t>(b) + 1], psi_.cell(b), terms_[static_cast<std::size_t>(b)], params.n);

        lo_.assign(lower_.size(), std::vector<Blocks>(static_cast<std::size_t>(L) + 1));
        ro_.assign(lower_.size(), std::vector<Blocks>(static_cast<std::size_t>(L) + 1));
        for(std::size_t k = 0; k < lower_.size(); ++k) {
            lo_[k][0][psi_.k0()]                          = Eigen::MatrixXd::Ones(1, 1);
            ro_[k][static_cast<std::size_t>(L)][psi_.k0()] = Eigen::MatrixXd::Ones(1, 1);
            for(int b = L - 1; b >= 2; --b)
                ro_[k][static_cast<std::size_t>(b)] = overlap_right(ro_[k][static_cast<std::size_t>(b) + 1], lower_[k]->cell(b), psi_.cell(b));
        }
    }

    double run(bool &converged) {
        const int L      = psi_.num_cells();
        double previous  = 0.0;
        double energy    = 0.0;
        converged        = false;
        for(int sweep = 1; sweep <= policy_.max_sweeps; ++sweep) {
            const auto t0   = std::chrono::steady_clock::now();
            max_truncation_ = 0.0;
            for(int j = 0; j + 2 < L; ++j) energy = optimize(j, true);
            for(int j = L - 2; j >= 0; --j) energy = optimize(j, false);
            SweepRecord rec;
            rec.sweep          = sweep;
            rec.energy         = energy;
            rec.max_truncation = max_truncation_;
            rec.max_bond       = psi_.max_bond_dimension();
            rec.seconds        = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            psi_.history.push_back(rec);
            if(sweep >= policy_.min_sweeps && std::abs(energy - previous) < policy_.energy_tol) {
                converged = true;
                break;
            }
            previous = energy;
        }
        psi_.set_center(0);
        return energy;
    }

    MpsState &state() { return psi_; }
    double max_truncation() const { return max_truncation_; }

private:
    double optimize(int j, bool move_right) {
        const auto ju     = static_cast<std::size_t>(j);
        const Layout lay  = make_layout(psi_.bond(j), psi_.bond(j + 2));
        Eigen::VectorXd theta = contract_pair(lay, psi_.cell(j), psi_.cell(j + 1));
        const EffectiveHamiltonian heff(lay, left_[ju], right_[ju + 2], pairs_[ju], params_.n);

        std::vector<Eigen::VectorXd> deflation;
        for(std::size_t k = 0; k < lower_.size(); ++k)
            deflation.push_back(projected_vector(lay, lo_[k][ju], ro_[k][ju + 2], lower_[k]->cell(j), lower_[k]->cell(j + 1)));

        KrylovOptions opts;
        opts.krylov_size = policy_.krylov_size;
        opts.keep        = 3;
        opts.max_matvecs = policy_.local_matvecs;
        opts.tol         = policy_.local_tol;
        const LinearMap apply = [&heff](const Eigen::VectorXd &x, Eigen::VectorXd &y) { heff.apply(x, y); };
        double value          = 0.0;
        if(static_cast<Eigen::Index>(orthonormalize(deflation).size()) >= lay.size) {
            // nothing left to optimize in this window; keep the current centre
            value = 0.0;
            Eigen::VectorXd h;
            heff.apply(theta, h);
            value = theta.dot(h) / std::max(theta.squaredNorm(), 1e-300);
        } else {
            const EigenPair pair = lowest_eigenpair(apply, theta, deflation, opts, policy_.seed + static_cast<std::uint64_t>(++solves_));
            theta                = pair.vector;
            value                = pair.value;
        }

        Split split = split_pair(lay, theta, psi_.bond(j), psi_.bond(j + 2), move_right, policy_);
        max_truncation_ = std::max(max_truncation_, split.discarded);
        psi_.cell(j)     = std::move(split.left);
        psi_.cell(j + 1) = std::move(split.right);
        psi_.bond(j + 1) = std::move(split.middle);

        if(move_right) {
            left_[ju + 1] = extend_left(left_[ju], psi_.cell(j), terms_[ju], params_.n);
            for(std::size_t k = 0; k < lower_.size(); ++k) lo_[k][ju + 1] = overlap_left(lo_[k][ju], lower_[k]->cell(j), psi_.cell(j));
            psi_.set_center(j + 1);
        } else {
            right_[ju + 1] = extend_right(right_[ju + 2], psi_.cell(j + 1), terms_[ju + 1], params_.n);
            for(std::size_t k = 0; k < lower_.size(); ++k) ro_[k][ju + 1] = overlap_right(ro_[k][ju + 2], lower_[k]->cell(j + 1), psi_.cell(j + 1));
            psi_.set_center(j);
        }
        return value;
    }

    const ModelParams &params_;
    const SweepPolicy &policy_;
    PairCellBasis cells_;
    MpsState psi_;
    std::vector<const MpsState *> lower_;
    std::vector<std::vector<SiteTerm>> terms_;
    std::vector<std::map<std::pair<int, int>, PairTable>> pairs_;
    std::vector<Env> left_, right_;
    std::vector<std::vector<Blocks>> lo_, ro_;
    double max_truncation_ = 0.0;
    std::uint64_t solves_  = 0;
};

void check_policy(const SweepPolicy &policy) {
    if(policy.chi < 8) throw std::invalid_argument("dmrg: chi must be at least 8");
    if(!(policy.cutoff >= 0.0)) throw std::invalid_argument("dmrg: cutoff must be non-negative");
    if(policy.max_sweeps < 1) throw std::invalid_argument("dmrg: need at least one sweep");
}

}  // namespace

Occupation seed_occupation(const ModelParams &params, SeedPattern seed) {
    const int L = params.geometry.pairs;
    Occupation sea = 0, meson = 0;
    for(int j = 0; j < L; ++j) {
        sea |= Occupation{1} << (2 * j + 1);
        meson |= Occupation{1} << (2 * j);
    }
    switch(seed) {
    case SeedPattern::dirac_sea: return sea;
    case SeedPattern::meson: return meson;
    case SeedPattern::automatic: break;
    }
    return diagonal_energy(params, GaugeState{meson, params.k0}) < diagonal_energy(params, GaugeState{sea, params.k0}) ? meson : sea;
}

double energy_expectation(const ModelParams &params, const MpsState &state) {
    const PairCellBasis cells(params.n);
    const auto terms = site_terms(build_mpo(params, cells), cells);
    std::array<Blocks, Mpo::channels> env;
    env[Mpo::start][state.k0()] = Eigen::MatrixXd::Ones(1, 1);
    for(int j = 0; j < state.num_cells(); ++j) {
        std::array<Blocks, Mpo::channels> next;
        const auto &t = state.cell(j);
        for(const auto &term : terms[static_cast<std::size_t>(j)]) {
            const int qa = Mpo::channel_charge[static_cast<std::size_t>(term.left)];
            for(const auto &[q, e] : env[static_cast<std::size_t>(term.left)])
                for(int p = 0; p < cell_physical_dim; ++p) {
                    const auto *ket = find_cell_block(t, q, p);
                    if(!ket) continue;
                    for(const auto &[pp, value] : term.by_label[static_cast<std::size_t>(wrap_label(q, params.n))][static_cast<std::size_t>(p)]) {
                        const auto *bra = find_cell_block(t, q + qa, pp);
                        if(bra) accumulate(next[static_cast<std::size_t>(term.right)], q + cell_charge(p), value * bra->transpose() * e * (*ket));
                    }
                }
        }
        env = std::move(next);
    }
    const auto *e = find_block(env[Mpo::finish], state.k0());
    return e ? (*e)(0, 0) : 0.0;
}

namespace {

DmrgResult finish_level(DmrgResult result, MpsState state, double energy, bool converged, double truncation, const SweepPolicy &policy) {
    double leak = 0.0;
    for(const auto &lower : result.states) leak = std::max(leak, std::abs(overlap(lower, state)));
    result.leakage        = std::max(result.leakage, leak);
    result.max_truncation = std::max(result.max_truncation, truncation);
    result.chi_exhausted  = result.chi_exhausted || truncation > policy.truncation_ceiling;
    result.spectrum.engine = "dmrg";
    result.spectrum.eigenvalues.push_back(energy);
    result.spectrum.residuals.push_back(state.history.size() >= 2
                                            ? std::abs(state.history.back().energy - state.history[state.history.size() - 2].energy)
                                            : 0.0);
    result.spectrum.iterations.push_back(static_cast<long>(state.history.size()));
    result.spectrum.converged = result.spectrum.converged && converged && leak <= policy.leakage_tol;
    result.states.push_back(std::move(state));
    flag_degeneracies(result.spectrum, 1e-8);
    return result;
}

}  // namespace

DmrgResult ground_state(const ModelParams &params, const SweepPolicy &policy, SeedPattern seed) {
    params.validate();
    check_policy(policy);
    const int L = params.geometry.pairs;
    Sweeper sweeper(params, policy, MpsState::product(params.n, params.k0, seed_occupation(params, seed), L), {});
    bool converged      = false;
    const double energy = sweeper.run(converged);
    return finish_level(DmrgResult{}, std::move(sweeper.state()), energy, converged, sweeper.max_truncation(), policy);
}

DmrgResult excited_states(const ModelParams &params, const DmrgResult &lower, int count, const SweepPolicy &policy) {
    params.validate();
    check_policy(policy);
    if(lower.states.empty()) throw std::invalid_argument("dmrg: excited states need a converged ground state");
    if(count < 0) throw std::invalid_argument("dmrg: negative level count");
    DmrgResult result = lower;
    const int L       = params.geometry.pairs;
    for(int level = 0; level < count; ++level) {
        std::vector<const MpsState *> below;
        for(const auto &s : result.states) below.push_back(&s);
        const std::uint64_t seed = policy.seed + 7919u * static_cast<std::uint64_t>(result.states.size());
        Sweeper sweeper(params, policy, MpsState::random(params.n, params.k0, L, 4, seed), below);
        bool converged      = false;
        const double energy = sweeper.run(converged);
        result = finish_level(std::move(result), std::move(sweeper.state()), energy, converged, sweeper.max_truncation(), policy);
    }
    return result;
}

DmrgResult lowest_states(const ModelParams &params, int levels, const SweepPolicy &policy) {
    if(levels < 1) throw std::invalid_argument("dmrg: need at least one level");
    return excited_states(params, ground_state(params, policy), levels - 1, policy);
}

}  // namespace zngauge
