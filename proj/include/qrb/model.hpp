// model.hpp - truncated operators, the Rabi-family Hamiltonian, parity, and the
// dressed eigenbasis.
//
// Product basis index is 2n + s with n the Fock index and s = 0 (spin down,
// qubit ground |0>) or s = 1 (spin up, qubit excited |1>). Energies are in
// units of the cavity frequency scale chosen by the caller (omega0 = 1 in all
// presets).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "qrb/errors.hpp"

namespace qrb {

struct ModelParams {
    double delta{1.0};   // qubit splitting
    double omega0{1.0};  // cavity frequency
    double g{0.0};       // coupling strength
    double r{1.0};       // weight of the counter-rotating terms
    double u{0.0};       // Stark coupling

    static ModelParams qrm(double g, double delta = 1.0, double omega0 = 1.0) {
        return {delta, omega0, g, 1.0, 0.0};
    }
    static ModelParams aqrm(double g, double r, double delta = 1.0, double omega0 = 1.0) {
        return {delta, omega0, g, r, 0.0};
    }
    static ModelParams qrsm(double g, double u, double delta = 1.0, double omega0 = 1.0) {
        return {delta, omega0, g, 1.0, u};
    }
    static ModelParams aqrsm(double g, double r, double u, double delta = 1.0,
                             double omega0 = 1.0) {
        return {delta, omega0, g, r, u};
    }
    static ModelParams jcm(double g, double delta = 1.0, double omega0 = 1.0) {
        return {delta, omega0, g, 0.0, 0.0};
    }

    void validate() const {
        if (!(omega0 > 0.0)) throw InvalidInput("ModelParams: omega0 must be > 0");
        if (!(g >= 0.0)) throw InvalidInput("ModelParams: g must be >= 0");
        if (!(r >= 0.0)) throw InvalidInput("ModelParams: r must be >= 0");
        if (!std::isfinite(delta) || !std::isfinite(u) || !std::isfinite(g) ||
            !std::isfinite(r) || !std::isfinite(omega0)) {
            throw InvalidInput("ModelParams: non-finite parameter");
        }
    }

    bool operator==(const ModelParams&) const = default;
};

struct TruncationSpec {
    int n_tr{100};  // highest Fock index kept

    Eigen::Index fock_dim() const { return n_tr + 1; }
    Eigen::Index dim() const { return 2 * (static_cast<Eigen::Index>(n_tr) + 1); }

    void validate() const {
        if (n_tr < 1) throw InvalidInput("TruncationSpec: n_tr must be >= 1");
    }

    bool operator==(const TruncationSpec&) const = default;
};

// ------------------------------ operators -----------------------------------

namespace spin {
// Basis {|0> = down, |1> = up}; sigma_z|1> = +|1>.
inline Eigen::Matrix2d sigma_z() { return (Eigen::Matrix2d() << -1, 0, 0, 1).finished(); }
inline Eigen::Matrix2d sigma_plus() { return (Eigen::Matrix2d() << 0, 0, 1, 0).finished(); }
inline Eigen::Matrix2d sigma_minus() { return sigma_plus().transpose(); }
inline Eigen::Matrix2d sigma_x() { return sigma_plus() + sigma_minus(); }
}  // namespace spin

inline Eigen::MatrixXd annihilation(const TruncationSpec& tr) {
    tr.validate();
    const Eigen::Index n = tr.fock_dim();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
        }
    }
    return out;
}

// Fock-space operator lifted to the full space (acts trivially on the qubit).
inline Eigen::MatrixXd on_cavity(const Eigen::MatrixXd& op) {
    return kron(op, Eigen::Matrix2d::Identity());
}

inline Eigen::MatrixXd on_qubit(const TruncationSpec& tr, const Eigen::Matrix2d& op) {
    return kron(Eigen::MatrixXd::Identity(tr.fock_dim(), tr.fock_dim()), op);
}

// a + a^dagger on the full space; couples the cavity to its bath and defines X^+.
inline Eigen::MatrixXd position_operator(const TruncationSpec& tr) {
    const Eigen::MatrixXd a = annihilation(tr);
    return on_cavity(a + a.transpose());
}

inline Eigen::MatrixXd qubit_sigma_x(const TruncationSpec& tr) {
    return on_qubit(tr, spin::sigma_x());
}

// dH/dg: the light-matter interaction with unit coupling.
inline Eigen::MatrixXd interaction_operator(const ModelParams& p, const TruncationSpec& tr) {
    const Eigen::MatrixXd a = annihilation(tr);
    const Eigen::MatrixXd ad = a.transpose();
    return kron(a, spin::sigma_plus()) + kron(ad, spin::sigma_minus()) +
           p.r * (kron(a, spin::sigma_minus()) + kron(ad, spin::sigma_plus()));
}

inline Eigen::MatrixXd hamiltonian(const ModelParams& p, const TruncationSpec& tr) {
    p.validate();
    const Eigen::MatrixXd a = annihilation(tr);
    const Eigen::MatrixXd num = a.transpose() * a;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(tr.fock_dim(), tr.fock_dim());
    Eigen::MatrixXd h = kron(0.5 * p.delta * id + p.u * num, spin::sigma_z());
    h += p.omega0 * on_cavity(num);
    h += p.g * interaction_operator(p, tr);
    return h;
}

// exp(i pi N) with N = a^dagger a + (sigma_z + 1)/2; diagonal in the product basis.
inline Eigen::DiagonalMatrix<double, Eigen::Dynamic> parity_operator(const TruncationSpec& tr) {
    tr.validate();
    Eigen::VectorXd d(tr.dim());
    for (Eigen::Index n = 0; n < tr.fock_dim(); ++n) {
        for (Eigen::Index s = 0; s < 2; ++s) d(2 * n + s) = ((n + s) % 2 == 0) ? 1.0 : -1.0;
    }
    return Eigen::DiagonalMatrix<double, Eigen::Dynamic>(d);
}

// ------------------------------ eigensystem ---------------------------------

struct Eigensystem {
    Eigen::VectorXd energies;  // ascending
    Eigen::MatrixXd vectors;   // column n is |phi_n> in the product basis
    std::vector<int> parities; // +1 / -1 per eigenstate

    Eigen::Index size() const { return energies.size(); }
    double gap(Eigen::Index k, Eigen::Index j) const { return energies(k) - energies(j); }
    TruncationSpec truncation() const {
        return TruncationSpec{static_cast<int>(vectors.rows() / 2 - 1)};
    }
};

inline constexpr double kParityCommutatorTol = 1e-10;
inline constexpr double kParityPurityTol = 1e-8;

// Diagonalizes H inside each parity sector and merges the two spectra. Working
// sector by sector keeps every eigenvector a parity eigenstate even when levels
// of opposite parity are exactly degenerate (level crossings).
inline Eigensystem diagonalize(const Eigen::MatrixXd& h,
                               const Eigen::DiagonalMatrix<double, Eigen::Dynamic>& parity,
                               bool with_vectors = true) {
    const Eigen::Index dim = h.rows();
    if (h.cols() != dim || parity.rows() != dim) {
        throw DimensionMismatch("diagonalize: Hamiltonian and parity dimensions differ");
    }
    const Eigen::VectorXd& pd = parity.diagonal();
    std::vector<Eigen::Index> sector[2];
    for (Eigen::Index i = 0; i < dim; ++i) sector[pd(i) > 0 ? 0 : 1].push_back(i);
    for (Eigen::Index i : sector[0]) {
        for (Eigen::Index j : sector[1]) {
            if (2.0 * std::abs(h(i, j)) > kParityCommutatorTol) {
                throw InvalidInput("diagonalize: Hamiltonian does not commute with parity");
            }
        }
    }

    Eigen::VectorXd energies(dim);
    Eigen::MatrixXd vectors;
    if (with_vectors) vectors = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<int> parities(static_cast<std::size_t>(dim));
    Eigen::Index col = 0;
    for (int s = 0; s < 2; ++s) {
        const auto& idx = sector[s];
        const auto n = static_cast<Eigen::Index>(idx.size());
        if (n == 0) continue;
        Eigen::MatrixXd block(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) block(i, j) = h(idx[i], idx[j]);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
            block, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) {
            throw PhysicsError("diagonalize: eigensolver failed to converge");
        }
        for (Eigen::Index k = 0; k < n; ++k) {
            energies(col) = solver.eigenvalues()(k);
            parities[static_cast<std::size_t>(col)] = s == 0 ? 1 : -1;
            if (with_vectors) {
                for (Eigen::Index i = 0; i < n; ++i) vectors(idx[i], col) = solver.eigenvectors()(i, k);
            }
            ++col;
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return energies(x) < energies(y); });

    Eigensystem es;
    es.energies.resize(dim);
    es.parities.resize(static_cast<std::size_t>(dim));
    if (with_vectors) es.vectors.resize(dim, dim);
    for (Eigen::Index n = 0; n < dim; ++n) {
        const Eigen::Index src = order[static_cast<std::size_t>(n)];
        es.energies(n) = energies(src);
        if (!with_vectors) {
            es.parities[static_cast<std::size_t>(n)] = parities[static_cast<std::size_t>(src)];
            continue;
        }
        Eigen::VectorXd v = vectors.col(src);
        // Largest-magnitude component made real positive (first one on ties).
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0.0) v = -v;
        const double expectation = v.cwiseAbs2().dot(pd);
        if (std::abs(expectation) < 1.0 - kParityPurityTol) {
            throw DegenerateParity("diagonalize: eigenstate " + std::to_string(n) +
                                   " has mixed parity <Pi> = " + std::to_string(expectation));
        }
        es.parities[static_cast<std::size_t>(n)] = expectation > 0.0 ? 1 : -1;
        es.vectors.col(n) = v;
    }
    return es;
}

inline Eigensystem solve_model(const ModelParams& p, const TruncationSpec& tr) {
    return diagonalize(hamiltonian(p, tr), parity_operator(tr));
}

// <phi_j| op |phi_k> for every pair.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
dressed_matrix(const Eigen::MatrixBase<Derived>& op, const Eigensystem& es) {
    if (op.rows() != es.vectors.rows() || op.cols() != es.vectors.rows()) {
        throw DimensionMismatch("dressed_matrix: operator dimension does not match eigensystem");
    }
    using Scalar = typename Derived::Scalar;
    const auto v = es.vectors.template cast<Scalar>();
    return v.adjoint() * op.derived() * v;
}

// Dressed-basis matrices of the two bath couplings, computed once per point.
struct DressedCouplings {
    Eigen::MatrixXd sigma_x;   // <phi_j|sigma_x|phi_k>
    Eigen::MatrixXd position;  // <phi_j|(a + a^dagger)|phi_k>
};

inline DressedCouplings dressed_couplings(const Eigensystem& es) {
    const TruncationSpec tr = es.truncation();
    return {dressed_matrix(qubit_sigma_x(tr), es), dressed_matrix(position_operator(tr), es)};
}

}  // namespace qrb
