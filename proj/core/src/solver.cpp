#include "evopf/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace evopf {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

const double kInf = std::numeric_limits<double>::infinity();

struct ConeBlockRef {
    ConeKind kind;
    int offset; // first row in the inequality system
    int dim;
};

// Inequality-form data:  min c'x  s.t.  A x = b,  G x + s = h,  s in K.
// Row order of G is the one documented on SolveOutcome.
struct InternalForm {
    int n = 0;
    SpMat A, G;
    Vec c, b, h;
    std::vector<ConeBlockRef> blocks;
    int nonneg_rows = 0;
    int soc_count = 0;
    int base_rows = 0; // program's own equality rows; pinned-column rows follow
};

InternalForm build_internal(const ConicProgram& prog) {
    InternalForm f;
    f.n = prog.num_cols();
    f.base_rows = prog.num_rows();

    std::vector<int> pinned;
    for (int j = 0; j < f.n; ++j) {
        if (prog.lower[j] == prog.upper[j]) pinned.push_back(j);
    }

    const int p = f.base_rows + static_cast<int>(pinned.size());
    std::vector<Triplet> ta;
    ta.reserve(prog.entries.size() + pinned.size());
    f.b.resize(p);
    f.b.setZero();
    for (const auto& e : prog.entries) ta.emplace_back(e.row, e.col, e.value);
    for (int i = 0; i < f.base_rows; ++i) f.b[i] = prog.rhs[i];
    for (std::size_t k = 0; k < pinned.size(); ++k) {
        const int row = f.base_rows + static_cast<int>(k);
        ta.emplace_back(row, pinned[k], 1.0);
        f.b[row] = prog.lower[pinned[k]];
    }
    f.A.resize(p, f.n);
    f.A.setFromTriplets(ta.begin(), ta.end());

    std::vector<Triplet> tg;
    std::vector<double> h;
    // lower bounds:  x_j - l >= 0  as  -x_j + s = -l
    for (int j = 0; j < f.n; ++j) {
        if (prog.lower[j] < prog.upper[j] && prog.lower[j] > -kInf) {
            tg.emplace_back(static_cast<int>(h.size()), j, -1.0);
            h.push_back(-prog.lower[j]);
        }
    }
    // upper bounds:  u - x_j >= 0  as  x_j + s = u
    for (int j = 0; j < f.n; ++j) {
        if (prog.lower[j] < prog.upper[j] && prog.upper[j] < kInf) {
            tg.emplace_back(static_cast<int>(h.size()), j, 1.0);
            h.push_back(prog.upper[j]);
        }
    }
    if (!h.empty()) {
        f.blocks.push_back({ConeKind::NonNeg, 0, static_cast<int>(h.size())});
        f.nonneg_rows = static_cast<int>(h.size());
    }
    // cone slices:  s = x_slice, i.e.  -x + s = 0
    for (const ConeSlice& slice : prog.cones) {
        const int offset = static_cast<int>(h.size());
        for (int i = 0; i < slice.dim; ++i) {
            tg.emplace_back(offset + i, slice.start + i, -1.0);
            h.push_back(0.0);
        }
        f.blocks.push_back({slice.kind, offset, slice.dim});
        if (slice.kind == ConeKind::NonNeg) {
            f.nonneg_rows += slice.dim;
        } else {
            ++f.soc_count;
        }
    }
    const int m = static_cast<int>(h.size());
    f.G.resize(m, f.n);
    f.G.setFromTriplets(tg.begin(), tg.end());
    f.h.resize(m);
    for (int i = 0; i < m; ++i) f.h[i] = h[i];
    f.c.resize(f.n);
    for (int j = 0; j < f.n; ++j) f.c[j] = prog.cost[j];
    return f;
}

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Stable u0^2 - ||u_tail||^2 for near-boundary points.
double jform(const Eigen::Ref<const Vec>& u) {
    const double t = u.tail(u.size() - 1).norm();
    return (u[0] - t) * (u[0] + t);
}

// Worst violation of cone membership, 0 when inside.
double cone_violation(const InternalForm& f, const Vec& v) {
    double worst = 0.0;
    for (const auto& blk : f.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            for (int i = 0; i < blk.dim; ++i) worst = std::max(worst, -v[blk.offset + i]);
        } else {
            const auto u = v.segment(blk.offset, blk.dim);
            worst = std::max(worst, u.tail(blk.dim - 1).norm() - u[0]);
        }
    }
    return worst;
}

// Margin to the cone boundary (min over blocks), negative outside.
double cone_margin(const InternalForm& f, const Vec& v) {
    double margin = kInf;
    for (const auto& blk : f.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            for (int i = 0; i < blk.dim; ++i) margin = std::min(margin, v[blk.offset + i]);
        } else {
            const auto u = v.segment(blk.offset, blk.dim);
            margin = std::min(margin, u[0] - u.tail(blk.dim - 1).norm());
        }
    }
    return margin;
}

Vec cone_identity(const InternalForm& f) {
    Vec e = Vec::Zero(f.G.rows());
    for (const auto& blk : f.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            e.segment(blk.offset, blk.dim).setOnes();
        } else {
            e[blk.offset] = 1.0;
        }
    }
    return e;
}

// Largest alpha with u + alpha*du still in the cone; kInf when unbounded.
double max_step(const InternalForm& f, const Vec& u, const Vec& du) {
    double alpha = kInf;
    for (const auto& blk : f.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            for (int i = 0; i < blk.dim; ++i) {
                const double d = du[blk.offset + i];
                if (d < 0.0) alpha = std::min(alpha, -u[blk.offset + i] / d);
            }
        } else {
            const auto ub = u.segment(blk.offset, blk.dim);
            const auto db = du.segment(blk.offset, blk.dim);
            double f0 = jform(ub);
            if (f0 < 0.0) f0 = 0.0;
            const double f1 =
                ub[0] * db[0] - ub.tail(blk.dim - 1).dot(db.tail(blk.dim - 1));
            const double f2 = db[0] * db[0] - db.tail(blk.dim - 1).squaredNorm();
            double root = kInf;
            if (f2 == 0.0) {
                if (f1 < 0.0) root = -f0 / (2.0 * f1);
            } else if (f2 > 0.0) {
                if (f1 < 0.0) {
                    const double disc = f1 * f1 - f0 * f2;
                    if (disc > 0.0) root = f0 / (-f1 + std::sqrt(disc));
                }
            } else {
                const double disc = f1 * f1 - f0 * f2;
                root = (-f1 - std::sqrt(disc)) / f2;
            }
            if (root >= 0.0) alpha = std::min(alpha, root);
            if (db[0] < 0.0) alpha = std::min(alpha, -ub[0] / db[0]);
        }
    }
    return alpha;
}

struct SocScale {
    int offset = 0;
    int dim = 0;
    double eta = 1.0;
    Vec wbar;
};

// Nesterov-Todd scaling W with lambda = W z = W^{-1} s.
struct Scaling {
    Vec w;      // per nonnegative row
    std::vector<SocScale> socs;
    Vec lambda; // scaled point, size m
};

// v <- H(wbar) v on one block, H = [[w0, w1'], [w1, I + w1 w1'/(1+w0)]].
void apply_hyperbolic(const Vec& wbar, Eigen::Ref<Vec> v) {
    const int d = static_cast<int>(wbar.size());
    const double v0 = v[0];
    const double cross = wbar.tail(d - 1).dot(v.tail(d - 1));
    v[0] = wbar[0] * v0 + cross;
    v.tail(d - 1) += (v0 + cross / (1.0 + wbar[0])) * wbar.tail(d - 1);
}

void identity_scaling(const InternalForm& f, Scaling& scal) {
    scal.w = Vec::Ones(f.G.rows());
    scal.socs.clear();
    for (const auto& blk : f.blocks) {
        if (blk.kind == ConeKind::Soc) {
            SocScale sc;
            sc.offset = blk.offset;
            sc.dim = blk.dim;
            sc.eta = 1.0;
            sc.wbar = Vec::Zero(blk.dim);
            sc.wbar[0] = 1.0;
            scal.socs.push_back(std::move(sc));
        }
    }
    scal.lambda = Vec::Zero(f.G.rows());
}

// Returns false when (s, z) are too close to the boundary to scale.
bool update_scaling(const InternalForm& f, const Vec& s, const Vec& z, Scaling& scal) {
    if (scal.w.size() != f.G.rows()) identity_scaling(f, scal);
    std::size_t soc_idx = 0;
    for (const auto& blk : f.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            for (int i = 0; i < blk.dim; ++i) {
                const int r = blk.offset + i;
                if (!(s[r] > 0.0) || !(z[r] > 0.0)) return false;
                scal.w[r] = std::sqrt(s[r] / z[r]);
                scal.lambda[r] = std::sqrt(s[r] * z[r]);
            }
        } else {
            SocScale& sc = scal.socs[soc_idx++];
            const auto sb = s.segment(blk.offset, blk.dim);
            const auto zb = z.segment(blk.offset, blk.dim);
            const double sj = jform(sb);
            const double zj = jform(zb);
            if (!(sj > 0.0) || !(zj > 0.0) || !(sb[0] > 0.0) || !(zb[0] > 0.0)) return false;
            const double snorm = std::sqrt(sj);
            const double znorm = std::sqrt(zj);
            const Vec sbar = sb / snorm;
            const Vec zbar = zb / znorm;
            const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
            if (!(gamma > 0.0)) return false;
            sc.wbar.resize(blk.dim);
            sc.wbar[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
            sc.wbar.tail(blk.dim - 1) =
                (sbar.tail(blk.dim - 1) - zbar.tail(blk.dim - 1)) / (2.0 * gamma);
            sc.eta = std::sqrt(snorm / znorm);
            Vec lam = zb;
            apply_hyperbolic(sc.wbar, lam);
            scal.lambda.segment(blk.offset, blk.dim) = sc.eta * lam;
        }
    }
    return true;
}

Vec apply_W(const InternalForm& f, const Scaling& scal, const Vec& v) {
    Vec out = v;
    std::size_t soc_idx = 0;
    for (const auto& blk : f.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            for (int i = 0; i < blk.dim; ++i) out[blk.offset + i] *= scal.w[blk.offset + i];
        } else {
            const SocScale& sc = scal.socs[soc_idx++];
            auto seg = out.segment(blk.offset, blk.dim);
            apply_hyperbolic(sc.wbar, seg);
            seg *= sc.eta;
        }
    }
    return out;
}

Vec apply_Winv(const InternalForm& f, const Scaling& scal, const Vec& v) {
    Vec out = v;
    std::size_t soc_idx = 0;
    for (const auto& blk : f.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            for (int i = 0; i < blk.dim; ++i) out[blk.offset + i] /= scal.w[blk.offset + i];
        } else {
            // H(wbar)^{-1} = J H(wbar) J with J = diag(1, -I)
            const SocScale& sc = scal.socs[soc_idx++];
            auto seg = out.segment(blk.offset, blk.dim);
            seg.tail(blk.dim - 1) *= -1.0;
            apply_hyperbolic(sc.wbar, seg);
            seg.tail(blk.dim - 1) *= -1.0;
            seg /= sc.eta;
        }
    }
    return out;
}

Vec jordan_product(const InternalForm& f, const Vec& u, const Vec& v) {
    Vec out(u.size());
    for (const auto& blk : f.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            for (int i = 0; i < blk.dim; ++i) {
                out[blk.offset + i] = u[blk.offset + i] * v[blk.offset + i];
            }
        } else {
            const auto ub = u.segment(blk.offset, blk.dim);
            const auto vb = v.segment(blk.offset, blk.dim);
            out[blk.offset] = ub.dot(vb);
            out.segment(blk.offset + 1, blk.dim - 1) =
                ub[0] * vb.tail(blk.dim - 1) + vb[0] * ub.tail(blk.dim - 1);
        }
    }
    return out;
}

// Solves lambda o u = v blockwise.
Vec jordan_divide(const InternalForm& f, const Vec& lambda, const Vec& v) {
    Vec out(v.size());
    for (const auto& blk : f.blocks) {
        if (blk.kind == ConeKind::NonNeg) {
            for (int i = 0; i < blk.dim; ++i) {
                out[blk.offset + i] = v[blk.offset + i] / lambda[blk.offset + i];
            }
        } else {
            const auto lb = lambda.segment(blk.offset, blk.dim);
            const auto vb = v.segment(blk.offset, blk.dim);
            const double a = lb[0];
            const auto btail = lb.tail(blk.dim - 1);
            const double det = jform(lb);
            const double u0 = (a * vb[0] - btail.dot(vb.tail(blk.dim - 1))) / det;
            out[blk.offset] = u0;
            out.segment(blk.offset + 1, blk.dim - 1) = (vb.tail(blk.dim - 1) - u0 * btail) / a;
        }
    }
    return out;
}

// Shared residual computation: the convergence test and the public
// residuals() both call this on original (unscaled) data.
ResidualReport residual_report(const InternalForm& f, const Vec& x, const Vec& y, const Vec& z) {
    ResidualReport rep;
    const Vec s_implied = f.h - f.G * x;
    const double eq = inf_norm(f.A * x - f.b);
    const double sviol = cone_violation(f, s_implied);
    rep.primal_abs = std::max(eq, sviol);
    rep.primal = std::max(eq / (1.0 + inf_norm(f.b)), sviol / (1.0 + inf_norm(f.h)));

    const Vec stat = f.c + f.A.transpose() * y + f.G.transpose() * z;
    const double zviol = cone_violation(f, z);
    rep.dual_abs = std::max(inf_norm(stat), zviol);
    rep.dual = std::max(inf_norm(stat) / (1.0 + inf_norm(f.c)),
                        zviol / (1.0 + inf_norm(z)));

    rep.primal_objective = f.c.dot(x);
    rep.dual_objective = -(f.b.dot(y) + f.h.dot(z));
    rep.gap = std::abs(rep.primal_objective - rep.dual_objective) /
              std::max({1.0, std::abs(rep.primal_objective), std::abs(rep.dual_objective)});
    return rep;
}

class KktSystem {
public:
    KktSystem(const InternalForm& f, double reg, int refine_steps)
        : f_(f), reg_(reg), refine_steps_(refine_steps) {
        n_ = f.n;
        p_ = static_cast<int>(f.A.rows());
        m_ = static_cast<int>(f.G.rows());
        dim_ = n_ + p_ + m_;
        build_pattern();
    }

    // Refactors with the current scaling; grows the regularization and
    // retries when the factorization breaks down. Returns false if it cannot
    // be factored at all.
    bool factor(const Scaling& scal) {
        scal_ = &scal;
        double reg = reg_;
        for (int attempt = 0; attempt < 4; ++attempt) {
            fill_values(scal, reg);
            K_.setFromTriplets(trips_.begin(), trips_.end());
            if (!analyzed_) {
                ldlt_.analyzePattern(K_);
                analyzed_ = true;
            }
            ldlt_.factorize(K_);
            if (ldlt_.info() == Eigen::Success) return true;
            reg *= 100.0;
        }
        return false;
    }

    // Solves the unregularized KKT system by refining against the factored
    // regularized one.
    Vec solve(const Vec& rhs) const {
        Vec u = ldlt_.solve(rhs);
        for (int it = 0; it < refine_steps_; ++it) {
            u += ldlt_.solve(rhs - multiply_exact(u));
        }
        return u;
    }

    int n() const { return n_; }
    int p() const { return p_; }
    int m() const { return m_; }

private:
    // K = [[0, A', G']; [A, 0, 0]; [G, 0, -W'W]] without regularization.
    Vec multiply_exact(const Vec& u) const {
        const Vec ux = u.head(n_);
        const Vec uy = u.segment(n_, p_);
        const Vec uz = u.tail(m_);
        Vec out(dim_);
        out.head(n_) = f_.A.transpose() * uy + f_.G.transpose() * uz;
        out.segment(n_, p_) = f_.A * ux;
        out.tail(m_) = f_.G * ux - apply_W(f_, *scal_, apply_W(f_, *scal_, uz));
        return out;
    }

    void build_pattern() {
        trips_.clear();
        for (int j = 0; j < n_; ++j) trips_.emplace_back(j, j, reg_);
        for (int ko = 0; ko < f_.A.outerSize(); ++ko) {
            for (SpMat::InnerIterator it(f_.A, ko); it; ++it) {
                trips_.emplace_back(n_ + static_cast<int>(it.row()),
                                    static_cast<int>(it.col()), it.value());
            }
        }
        for (int i = 0; i < p_; ++i) trips_.emplace_back(n_ + i, n_ + i, -reg_);
        for (int ko = 0; ko < f_.G.outerSize(); ++ko) {
            for (SpMat::InnerIterator it(f_.G, ko); it; ++it) {
                trips_.emplace_back(n_ + p_ + static_cast<int>(it.row()),
                                    static_cast<int>(it.col()), it.value());
            }
        }
        wtw_begin_ = trips_.size();
        // -W'W: diagonal for nonnegative rows, dense lower blocks for cones
        for (const auto& blk : f_.blocks) {
            if (blk.kind == ConeKind::NonNeg) {
                for (int i = 0; i < blk.dim; ++i) {
                    const int r = n_ + p_ + blk.offset + i;
                    trips_.emplace_back(r, r, -1.0 - reg_);
                }
            } else {
                for (int i = 0; i < blk.dim; ++i) {
                    for (int j = 0; j <= i; ++j) {
                        trips_.emplace_back(n_ + p_ + blk.offset + i, n_ + p_ + blk.offset + j,
                                            i == j ? -1.0 - reg_ : 0.0);
                    }
                }
            }
        }
        K_.resize(dim_, dim_);
    }

    void fill_values(const Scaling& scal, double reg) {
        for (int j = 0; j < n_; ++j) trips_[j] = Triplet(j, j, reg);
        std::size_t k = wtw_begin_;
        std::size_t soc_idx = 0;
        for (const auto& blk : f_.blocks) {
            if (blk.kind == ConeKind::NonNeg) {
                for (int i = 0; i < blk.dim; ++i) {
                    const int r = n_ + p_ + blk.offset + i;
                    const double w = scal.w[blk.offset + i];
                    trips_[k++] = Triplet(r, r, -w * w - reg);
                }
            } else {
                // -W'W = eta^2 (J - 2 wbar wbar')
                const SocScale& sc = scal.socs[soc_idx++];
                const double e2 = sc.eta * sc.eta;
                for (int i = 0; i < blk.dim; ++i) {
                    for (int j = 0; j <= i; ++j) {
                        double v = -2.0 * e2 * sc.wbar[i] * sc.wbar[j];
                        if (i == j) v += (i == 0 ? e2 : -e2) - reg;
                        trips_[k++] = Triplet(n_ + p_ + blk.offset + i,
                                              n_ + p_ + blk.offset + j, v);
                    }
                }
            }
        }
    }

    const InternalForm& f_;
    double reg_;
    int refine_steps_;
    int n_ = 0, p_ = 0, m_ = 0, dim_ = 0;
    std::vector<Triplet> trips_;
    std::size_t wtw_begin_ = 0;
    SpMat K_;
    Eigen::SimplicialLDLT<SpMat> ldlt_;
    bool analyzed_ = false;
    const Scaling* scal_ = nullptr;
};

struct Equilibration {
    Vec col;        // per column
    Vec row_a;      // per equality row
    Vec row_g;      // per inequality row (uniform within a cone block)
    double cost_scale = 1.0;
};

// Ruiz scaling toward unit row/column infinity norms. Rows of one cone block
// share a scale so the cone geometry is preserved.
Equilibration equilibrate(InternalForm& f) {
    const int n = f.n;
    const int p = static_cast<int>(f.A.rows());
    const int m = static_cast<int>(f.G.rows());
    Equilibration eq;
    eq.col = Vec::Ones(n);
    eq.row_a = Vec::Ones(p);
    eq.row_g = Vec::Ones(m);

    std::vector<int> block_of(m, -1);
    for (std::size_t bi = 0; bi < f.blocks.size(); ++bi) {
        for (int i = 0; i < f.blocks[bi].dim; ++i) block_of[f.blocks[bi].offset + i] = (int)bi;
    }

    for (int pass = 0; pass < 10; ++pass) {
        Vec colmax = Vec::Zero(n), rowamax = Vec::Zero(p);
        Vec blockmax = Vec::Zero(std::max<std::size_t>(1, f.blocks.size()));
        for (int ko = 0; ko < f.A.outerSize(); ++ko) {
            for (SpMat::InnerIterator it(f.A, ko); it; ++it) {
                const double v = std::abs(eq.row_a[it.row()] * it.value() * eq.col[it.col()]);
                colmax[it.col()] = std::max(colmax[it.col()], v);
                rowamax[it.row()] = std::max(rowamax[it.row()], v);
            }
        }
        for (int ko = 0; ko < f.G.outerSize(); ++ko) {
            for (SpMat::InnerIterator it(f.G, ko); it; ++it) {
                const double v = std::abs(eq.row_g[it.row()] * it.value() * eq.col[it.col()]);
                colmax[it.col()] = std::max(colmax[it.col()], v);
                const int bi = block_of[it.row()];
                blockmax[bi] = std::max(blockmax[bi], v);
            }
        }
        for (int j = 0; j < n; ++j) {
            if (colmax[j] > 0.0) eq.col[j] /= std::sqrt(colmax[j]);
        }
        for (int i = 0; i < p; ++i) {
            if (rowamax[i] > 0.0) eq.row_a[i] /= std::sqrt(rowamax[i]);
        }
        for (std::size_t bi = 0; bi < f.blocks.size(); ++bi) {
            if (blockmax[bi] > 0.0) {
                const double s = 1.0 / std::sqrt(blockmax[bi]);
                for (int i = 0; i < f.blocks[bi].dim; ++i) eq.row_g[f.blocks[bi].offset + i] *= s;
            }
        }
    }

    for (int ko = 0; ko < f.A.outerSize(); ++ko) {
        for (SpMat::InnerIterator it(f.A, ko); it; ++it) {
            it.valueRef() *= eq.row_a[it.row()] * eq.col[it.col()];
        }
    }
    for (int ko = 0; ko < f.G.outerSize(); ++ko) {
        for (SpMat::InnerIterator it(f.G, ko); it; ++it) {
            it.valueRef() *= eq.row_g[it.row()] * eq.col[it.col()];
        }
    }
    f.b.array() *= eq.row_a.array();
    f.h.array() *= eq.row_g.array();
    f.c.array() *= eq.col.array();
    eq.cost_scale = std::max(1.0, inf_norm(f.c));
    f.c /= eq.cost_scale;
    return eq;
}

struct Candidate {
    Vec x, y, z, s;
};

std::vector<double> to_std(const Vec& v) {
    std::vector<double> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v[i];
    return out;
}

Vec stack3(const Vec& a, const Vec& b, const Vec& c) {
    Vec out(a.size() + b.size() + c.size());
    out.head(a.size()) = a;
    out.segment(a.size(), b.size()) = b;
    out.tail(c.size()) = c;
    return out;
}

// Unscale an embedding iterate back to the original problem space.
Candidate unscale(const Equilibration& eq, const Vec& x, const Vec& y, const Vec& z, const Vec& s,
                  double tau) {
    Candidate cand;
    cand.x = (eq.col.array() * x.array()) / tau;
    cand.y = eq.cost_scale * (eq.row_a.array() * y.array()) / tau;
    cand.z = eq.cost_scale * (eq.row_g.array() * z.array()) / tau;
    cand.s = (s.array() / eq.row_g.array()) / tau;
    return cand;
}

void shift_into_cone(const InternalForm& f, Vec& v, const Vec& e) {
    if (v.size() == 0) return;
    const double margin = cone_margin(f, v);
    if (margin < 1e-8) v += (1.0 - margin) * e;
}

std::string fmt_log(int iter, const ResidualReport& rep, double mu, double sigma, double alpha,
                    double tau, double kappa) {
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "it %3d  pres %9.2e  dres %9.2e  gap %9.2e  mu %9.2e  sigma %5.3f  "
                  "alpha %5.3f  tau %9.2e  kappa %9.2e",
                  iter, rep.primal, rep.dual, rep.gap, mu, sigma, alpha, tau, kappa);
    return buf;
}

} // namespace

std::string to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal-infeasible";
    case SolveStatus::DualInfeasible: return "dual-infeasible";
    case SolveStatus::IterationLimit: return "iteration-limit";
    case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

ResidualReport residuals(const ConicProgram& program, const std::vector<double>& x,
                         const std::vector<double>& y, const std::vector<double>& z) {
    const InternalForm f = build_internal(program);
    if (static_cast<int>(x.size()) != f.n || y.size() != static_cast<std::size_t>(f.A.rows()) ||
        z.size() != static_cast<std::size_t>(f.G.rows())) {
        throw InputError("residuals: dimension mismatch");
    }
    Vec xv(x.size()), yv(y.size()), zv(z.size());
    for (std::size_t i = 0; i < x.size(); ++i) xv[static_cast<Eigen::Index>(i)] = x[i];
    for (std::size_t i = 0; i < y.size(); ++i) yv[static_cast<Eigen::Index>(i)] = y[i];
    for (std::size_t i = 0; i < z.size(); ++i) zv[static_cast<Eigen::Index>(i)] = z[i];
    return residual_report(f, xv, yv, zv);
}

SolveOutcome solve(const ConicProgram& program, const SolverSettings& settings) {
    program.validate();
    if (program.num_cols() == 0) throw InputError("solve: program has no columns");
    for (std::uint8_t mark : program.integer_marks) {
        if (mark) throw InputError("solve: integer-marked columns present; fix or relax them");
    }
    if (!(settings.feas_tol > 0.0) || !(settings.gap_tol > 0.0)) {
        throw InputError("solve: tolerances must be positive");
    }

    const InternalForm f_orig = build_internal(program);
    InternalForm f = f_orig;
    Equilibration eq;
    if (settings.equilibrate) {
        eq = equilibrate(f);
    } else {
        eq.col = Vec::Ones(f.n);
        eq.row_a = Vec::Ones(f.A.rows());
        eq.row_g = Vec::Ones(f.G.rows());
    }

    const int n = f.n;
    const int p = static_cast<int>(f.A.rows());
    const int m = static_cast<int>(f.G.rows());
    const double nu = static_cast<double>(f.nonneg_rows + f.soc_count);

    SolveOutcome out;
    auto finish = [&](SolveStatus status, const Candidate& cand, int iters,
                      const ResidualReport& rep) {
        out.status = status;
        out.x = to_std(cand.x);
        out.y = to_std(cand.y);
        out.z = to_std(cand.z);
        out.s = to_std(cand.s);
        out.objective = f_orig.c.dot(cand.x);
        out.residuals = rep;
        out.iterations = iters;
        return out;
    };

    KktSystem kkt(f, settings.static_reg, settings.refine_steps);
    Scaling scal;
    identity_scaling(f, scal);
    if (!kkt.factor(scal)) {
        throw NumericalError("solve: initial KKT factorization failed");
    }

    const Vec e = cone_identity(f);

    // Start point: two solves with W = I, then shift (s, z) inside the cone.
    Vec u = kkt.solve(stack3(Vec::Zero(n), f.b, f.h));
    Vec x = u.head(n);
    Vec s = -u.tail(m);
    u = kkt.solve(stack3(-f.c, Vec::Zero(p), Vec::Zero(m)));
    Vec y = u.segment(n, p);
    Vec z = u.tail(m);
    shift_into_cone(f, s, e);
    shift_into_cone(f, z, e);
    double tau = 1.0, kappa = 1.0;

    Candidate cand = unscale(eq, x, y, z, s, tau);
    ResidualReport rep = residual_report(f_orig, cand.x, cand.y, cand.z);

    double sigma_last = 0.0, alpha_last = 0.0, mu = 0.0;
    for (int iter = 0; iter <= settings.max_iterations; ++iter) {
        // residuals of the embedding
        const Vec rx = f.A.transpose() * y + f.G.transpose() * z + f.c * tau;
        const Vec ry = f.A * x - f.b * tau;
        const Vec rz = f.G * x + s - f.h * tau;
        const double rt = f.c.dot(x) + f.b.dot(y) + f.h.dot(z) + kappa;

        mu = (s.dot(z) + tau * kappa) / (nu + 1.0);

        cand = unscale(eq, x, y, z, s, tau);
        rep = residual_report(f_orig, cand.x, cand.y, cand.z);
        if (settings.log) {
            settings.log(fmt_log(iter, rep, mu, sigma_last, alpha_last, tau, kappa));
        }
        if (rep.primal <= settings.feas_tol && rep.dual <= settings.feas_tol &&
            rep.gap <= settings.gap_tol) {
            return finish(SolveStatus::Optimal, cand, iter, rep);
        }

        // infeasibility certificates, tested on original data
        const double by_hz = f_orig.b.dot(cand.y * tau) + f_orig.h.dot(cand.z * tau);
        if (by_hz < 0.0) {
            Vec cy = cand.y * (tau / -by_hz);
            Vec cz = cand.z * (tau / -by_hz);
            const double res =
                inf_norm(f_orig.A.transpose() * cy + f_orig.G.transpose() * cz);
            if (res <= settings.feas_tol && cone_violation(f_orig, cz) <= settings.feas_tol) {
                Candidate cert{Vec::Zero(n), cy, cz, Vec::Zero(m)};
                rep = residual_report(f_orig, cert.x, cert.y, cert.z);
                return finish(SolveStatus::PrimalInfeasible, cert, iter, rep);
            }
        }
        const double cx = f_orig.c.dot(cand.x * tau);
        if (cx < 0.0) {
            Vec cxv = cand.x * (tau / -cx);
            const Vec gs = -(f_orig.G * cxv);
            if (inf_norm(f_orig.A * cxv) <= settings.feas_tol &&
                cone_violation(f_orig, gs) <= settings.feas_tol) {
                Candidate cert{cxv, Vec::Zero(p), Vec::Zero(m), gs};
                rep = residual_report(f_orig, cert.x, Vec::Zero(p), Vec::Zero(m));
                return finish(SolveStatus::DualInfeasible, cert, iter, rep);
            }
        }

        if (iter == settings.max_iterations) break;

        // Near the cone boundary the Jordan form of s or z can cancel to
        // zero; reusing the previous iterate's scaling keeps the step usable
        // and the fresh residual test above still decides convergence.
        if (!update_scaling(f, s, z, scal) && iter == 0) {
            return finish(SolveStatus::NumericalFailure, cand, iter, rep);
        }
        if (!kkt.factor(scal)) {
            return finish(SolveStatus::NumericalFailure, cand, iter, rep);
        }

        // constant column of the embedding
        const Vec u1 = kkt.solve(stack3(-f.c, f.b, f.h));
        const Vec x1 = u1.head(n), y1 = u1.segment(n, p), z1 = u1.tail(m);
        const double denom = f.c.dot(x1) + f.b.dot(y1) + f.h.dot(z1) - kappa / tau;
        if (!std::isfinite(denom) || denom >= 0.0) {
            return finish(SolveStatus::NumericalFailure, cand, iter, rep);
        }

        auto direction = [&](const Vec& dx, const Vec& dy, const Vec& dz_in, double dtau_rhs,
                             const Vec& ds_in, double dkappa_rhs, Vec& Dx, Vec& Dy, Vec& Dz,
                             Vec& Ds, double& Dtau, double& Dkappa) {
            const Vec lam_div = jordan_divide(f, scal.lambda, ds_in);
            const Vec dz_tilde = dz_in - apply_W(f, scal, lam_div);
            const Vec u2 = kkt.solve(stack3(dx, dy, dz_tilde));
            const Vec x2 = u2.head(n), y2 = u2.segment(n, p), z2 = u2.tail(m);
            Dtau = (dtau_rhs - dkappa_rhs / tau - (f.c.dot(x2) + f.b.dot(y2) + f.h.dot(z2))) /
                   denom;
            Dx = x2 + Dtau * x1;
            Dy = y2 + Dtau * y1;
            Dz = z2 + Dtau * z1;
            Ds = apply_W(f, scal, lam_div - apply_W(f, scal, Dz));
            Dkappa = (dkappa_rhs - kappa * Dtau) / tau;
        };

        // predictor
        Vec dxa, dya, dza, dsa;
        double dtaua, dkappaa;
        const Vec minus_ll = -jordan_product(f, scal.lambda, scal.lambda);
        direction(-rx, -ry, -rz, -rt, minus_ll, -tau * kappa, dxa, dya, dza, dsa, dtaua, dkappaa);
        if (!dxa.allFinite() || !std::isfinite(dtaua)) {
            return finish(SolveStatus::NumericalFailure, cand, iter, rep);
        }

        double alpha_aff = std::min(max_step(f, s, dsa), max_step(f, z, dza));
        if (dtaua < 0.0) alpha_aff = std::min(alpha_aff, -tau / dtaua);
        if (dkappaa < 0.0) alpha_aff = std::min(alpha_aff, -kappa / dkappaa);
        alpha_aff = std::min(1.0, alpha_aff);
        const double mu_aff = ((s + alpha_aff * dsa).dot(z + alpha_aff * dza) +
                               (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkappaa)) /
                              (nu + 1.0);
        double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
        sigma = std::min(1.0, sigma);

        // corrector, combined direction
        const Vec corr = jordan_product(f, apply_Winv(f, scal, dsa), apply_W(f, scal, dza));
        const Vec ds_rhs = minus_ll - corr + sigma * mu * e;
        const double dkappa_rhs = -tau * kappa - dtaua * dkappaa + sigma * mu;
        Vec dx, dy, dz, ds;
        double dtau, dkappa;
        const double rho = 1.0 - sigma;
        direction(-rho * rx, -rho * ry, -rho * rz, -rho * rt, ds_rhs, dkappa_rhs, dx, dy, dz, ds,
                  dtau, dkappa);
        if (!dx.allFinite() || !std::isfinite(dtau)) {
            return finish(SolveStatus::NumericalFailure, cand, iter, rep);
        }

        double alpha_max = std::min(max_step(f, s, ds), max_step(f, z, dz));
        if (dtau < 0.0) alpha_max = std::min(alpha_max, -tau / dtau);
        if (dkappa < 0.0) alpha_max = std::min(alpha_max, -kappa / dkappa);
        const double alpha = std::min(1.0, 0.99 * alpha_max);
        if (!(alpha > 1e-10)) {
            return finish(SolveStatus::NumericalFailure, cand, iter, rep);
        }

        x += alpha * dx;
        y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
        tau += alpha * dtau;
        kappa += alpha * dkappa;
        sigma_last = sigma;
        alpha_last = alpha;
        if (!(tau > 0.0) || !(kappa > 0.0) || !x.allFinite()) {
            cand = unscale(eq, x, y, z, s, std::max(tau, 1e-300));
            rep = residual_report(f_orig, cand.x, cand.y, cand.z);
            return finish(SolveStatus::NumericalFailure, cand, iter, rep);
        }
    }

    return finish(SolveStatus::IterationLimit, cand, settings.max_iterations, rep);
}

} // namespace evopf
