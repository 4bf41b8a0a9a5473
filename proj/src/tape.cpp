#include "pinn/tape.hpp"

#include <cmath>

namespace pinn {

NodeId Tape::push(Op op, NodeId a, NodeId b, double v, std::uint32_t aux) {
    op_.push_back(op);
    a_.push_back(a);
    b_.push_back(b);
    val_.push_back(v);
    aux_.push_back(aux);
    return static_cast<NodeId>(op_.size() - 1);
}

NodeId Tape::jet_leaf(int term, int point, int coeff, double raw_coeff, double scale) {
    leaves_.push_back({static_cast<std::uint32_t>(term), static_cast<std::uint32_t>(point),
                       static_cast<std::uint32_t>(coeff), scale});
    return push(Op::JetLeaf, 0, 0, raw_coeff * scale,
                static_cast<std::uint32_t>(leaves_.size() - 1));
}

NodeId Tape::scale(NodeId a, double s) {
    dpool_.push_back(s);
    return push(Op::Scale, a, 0, val_[a] * s, static_cast<std::uint32_t>(dpool_.size() - 1));
}

NodeId Tape::mean_square(const std::vector<NodeId>& children) {
    const auto off = static_cast<std::uint32_t>(children_.size());
    children_.insert(children_.end(), children.begin(), children.end());
    lists_.push_back({off, static_cast<std::uint32_t>(children.size()), 0});
    double acc = 0.0;
    for (NodeId c : children) acc += val_[c] * val_[c];
    acc /= static_cast<double>(children.size());
    return push(Op::MeanSquare, 0, 0, acc, static_cast<std::uint32_t>(lists_.size() - 1));
}

NodeId Tape::weighted_sum(const std::vector<NodeId>& children, const std::vector<double>& w) {
    if (children.size() != w.size()) throw ConfigError("weighted_sum: length mismatch");
    const auto off = static_cast<std::uint32_t>(children_.size());
    const auto woff = static_cast<std::uint32_t>(dpool_.size());
    children_.insert(children_.end(), children.begin(), children.end());
    dpool_.insert(dpool_.end(), w.begin(), w.end());
    lists_.push_back({off, static_cast<std::uint32_t>(children.size()), woff});
    double acc = 0.0;
    for (std::size_t i = 0; i < children.size(); ++i) acc += w[i] * val_[children[i]];
    return push(Op::WeightedSum, 0, 0, acc, static_cast<std::uint32_t>(lists_.size() - 1));
}

void Tape::clear() {
    op_.clear();
    a_.clear();
    b_.clear();
    val_.clear();
    aux_.clear();
    leaves_.clear();
    dpool_.clear();
    children_.clear();
    lists_.clear();
}

void Tape::replay() {
    for (std::size_t i = 0; i < op_.size(); ++i) {
        switch (op_[i]) {
            case Op::Const:
            case Op::JetLeaf:
            case Op::MuLeaf: break;
            case Op::Add: val_[i] = val_[a_[i]] + val_[b_[i]]; break;
            case Op::Sub: val_[i] = val_[a_[i]] - val_[b_[i]]; break;
            case Op::Mul: val_[i] = val_[a_[i]] * val_[b_[i]]; break;
            case Op::Div: val_[i] = val_[a_[i]] / val_[b_[i]]; break;
            case Op::Neg: val_[i] = -val_[a_[i]]; break;
            case Op::Square: val_[i] = val_[a_[i]] * val_[a_[i]]; break;
            case Op::Scale: val_[i] = val_[a_[i]] * dpool_[aux_[i]]; break;
            case Op::MeanSquare: {
                const auto& lst = lists_[aux_[i]];
                double acc = 0.0;
                for (std::uint32_t j = 0; j < lst.count; ++j) {
                    const double v = val_[children_[lst.offset + j]];
                    acc += v * v;
                }
                val_[i] = acc / static_cast<double>(lst.count);
                break;
            }
            case Op::WeightedSum: {
                const auto& lst = lists_[aux_[i]];
                double acc = 0.0;
                for (std::uint32_t j = 0; j < lst.count; ++j)
                    acc += dpool_[lst.woffset + j] * val_[children_[lst.offset + j]];
                val_[i] = acc;
                break;
            }
        }
    }
}

Tape::SweepResult Tape::reverse(NodeId root, std::vector<JetAdjointSink>& sinks) const {
    SweepResult res;
    res.term_touched.assign(sinks.size(), 0);
    std::vector<double> adj(root + 1, 0.0);
    adj[root] = 1.0;
    for (std::int64_t i = root; i >= 0; --i) {
        const double g = adj[i];
        if (g == 0.0) continue;
        switch (op_[i]) {
            case Op::Const: break;
            case Op::JetLeaf: {
                const auto& lf = leaves_[aux_[i]];
                auto& sink = sinks[lf.term];
                sink.buf[static_cast<std::size_t>(lf.point) * sink.ncoef + lf.coeff] +=
                    g * lf.scale;
                res.term_touched[lf.term] = 1;
                break;
            }
            case Op::MuLeaf: res.mu_adjoint += g; break;
            case Op::Add:
                adj[a_[i]] += g;
                adj[b_[i]] += g;
                break;
            case Op::Sub:
                adj[a_[i]] += g;
                adj[b_[i]] -= g;
                break;
            case Op::Mul:
                adj[a_[i]] += g * val_[b_[i]];
                adj[b_[i]] += g * val_[a_[i]];
                break;
            case Op::Div:
                adj[a_[i]] += g / val_[b_[i]];
                adj[b_[i]] -= g * val_[i] / val_[b_[i]];
                break;
            case Op::Neg: adj[a_[i]] -= g; break;
            case Op::Square: adj[a_[i]] += 2.0 * val_[a_[i]] * g; break;
            case Op::Scale: adj[a_[i]] += g * dpool_[aux_[i]]; break;
            case Op::MeanSquare: {
                const auto& lst = lists_[aux_[i]];
                const double f = 2.0 * g / static_cast<double>(lst.count);
                for (std::uint32_t j = 0; j < lst.count; ++j) {
                    const NodeId c = children_[lst.offset + j];
                    adj[c] += f * val_[c];
                }
                break;
            }
            case Op::WeightedSum: {
                const auto& lst = lists_[aux_[i]];
                for (std::uint32_t j = 0; j < lst.count; ++j)
                    adj[children_[lst.offset + j]] += g * dpool_[lst.woffset + j];
                break;
            }
        }
    }
    return res;
}

}  // namespace pinn
