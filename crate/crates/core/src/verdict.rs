use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    QuasiEquivalent,
    Disjoint,
    Inconclusive,
}

/// Why a verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reason {
    /// The transition probability is strictly positive.
    PositiveTransitionProbability,
    /// A real vector is null for one auxiliary form but not the other; the
    /// corresponding Weyl unitaries are central and act differently.
    CentralElementMismatch,
    /// Supports of the metrics `S + conj(S)` and `T + conj(T)` differ.
    SupportMismatch,
    /// The per-mode Hilbert-Schmidt series diverges.
    HsDivergence,
    /// The product of per-mode transition probabilities tends to zero.
    VanishingTransitionProduct,
    /// The per-mode Hilbert-Schmidt series converges.
    HsConvergence,
    /// The partial sums do not settle either way at the given horizon.
    Undecided,
}
