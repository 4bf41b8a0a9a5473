#pragma once

// Recorded scalar computation linking jet entries, the PDE parameter and
// constants to term losses and the scalarised loss. The heavy network math
// stays in the batched kernels; the tape holds the light per-point residual
// arithmetic and reductions, and drives the reverse sweep.
//
// Node ids are topologically ordered by construction. Values are computed
// eagerly; replay() recomputes them in the same order (bit-identical within
// one process run). Nodes not reachable from the sweep root simply keep a
// zero adjoint.

#include <cstdint>
#include <vector>

#include "pinn/common.hpp"

namespace pinn {

using NodeId = std::uint32_t;

enum class Op : std::uint8_t {
    Const,
    JetLeaf,  // one Taylor coefficient of one point of one term batch
    MuLeaf,   // the trainable PDE parameter
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Square,
    Scale,       // a * compile-constant
    MeanSquare,  // (1/n) sum v_i^2 over a child list
    WeightedSum  // sum w_i * v_i, weights are constants (no gradient into w)
};

class Tape {
  public:
    NodeId constant(double v) { return push(Op::Const, 0, 0, v, 0); }
    // `scale` converts the raw Taylor coefficient into the quantity the node
    // represents (ix!*iy! when the node stands for a mixed partial).
    NodeId jet_leaf(int term, int point, int coeff, double raw_coeff, double scale = 1.0);
    NodeId mu_leaf(double mu_value) { return push(Op::MuLeaf, 0, 0, mu_value, 0); }

    NodeId add(NodeId a, NodeId b) { return push(Op::Add, a, b, val_[a] + val_[b], 0); }
    NodeId sub(NodeId a, NodeId b) { return push(Op::Sub, a, b, val_[a] - val_[b], 0); }
    NodeId mul(NodeId a, NodeId b) { return push(Op::Mul, a, b, val_[a] * val_[b], 0); }
    NodeId div(NodeId a, NodeId b) { return push(Op::Div, a, b, val_[a] / val_[b], 0); }
    NodeId neg(NodeId a) { return push(Op::Neg, a, 0, -val_[a], 0); }
    NodeId square(NodeId a) { return push(Op::Square, a, 0, val_[a] * val_[a], 0); }
    NodeId scale(NodeId a, double s);
    NodeId mean_square(const std::vector<NodeId>& children);
    NodeId weighted_sum(const std::vector<NodeId>& children, const std::vector<double>& w);

    double value(NodeId id) const { return val_[id]; }
    std::size_t size() const { return op_.size(); }
    void clear();

    // Recomputes every non-leaf value in recording order.
    void replay();

    struct JetAdjointSink {
        double* buf = nullptr;  // [point * ncoef + coeff]
        int ncoef = 1;
    };
    struct SweepResult {
        double mu_adjoint = 0.0;
        std::vector<char> term_touched;
    };
    // Reverse sweep seeded with d(root)=1. Jet-leaf adjoints are scattered
    // into the per-term sinks (already multiplied by the leaf scale).
    SweepResult reverse(NodeId root, std::vector<JetAdjointSink>& sinks) const;

  private:
    NodeId push(Op op, NodeId a, NodeId b, double v, std::uint32_t aux);

    std::vector<Op> op_;
    std::vector<NodeId> a_, b_;
    std::vector<double> val_;
    std::vector<std::uint32_t> aux_;

    struct LeafRef {
        std::uint32_t term, point, coeff;
        double scale;
    };
    std::vector<LeafRef> leaves_;
    std::vector<double> dpool_;        // Scale factors, WeightedSum weights
    std::vector<NodeId> children_;     // pooled child lists
    struct ListRef {
        std::uint32_t offset, count, woffset;
    };
    std::vector<ListRef> lists_;
};

}  // namespace pinn
