#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agformer/anchors.hpp"
#include "agformer/autodiff.hpp"
#include "agformer/graph.hpp"
#include "agformer/rng.hpp"

namespace agf {

enum class Backbone { gcn, gin };
// louvain / random build anchors; full replaces both anchor blocks with
// node-to-node self-attention (the baseline).
enum class AnchorMode { louvain, random, full };

std::string to_string(Backbone b);
std::string to_string(AnchorMode m);
Backbone parse_backbone(const std::string& s);
AnchorMode parse_anchor_mode(const std::string& s);

struct ModelConfig {
  Backbone backbone = Backbone::gcn;
  std::size_t input_dim = 0;
  std::size_t num_gnn_layers = 4;
  std::size_t hidden_dim = 256;
  std::size_t proj_dim = 256;
  std::size_t ffn_hidden = 512;
  double dropout = 0.1;
  std::size_t num_classes = 2;
  AnchorMode anchor_mode = AnchorMode::louvain;

  void validate() const;
};

struct GinLayerParams {
  Parameter eps;  // 1x1, starts at 0
  Parameter w1, b1, w2, b2;
};

// One transformer block: single-head attention with residual + LN, then a
// two-layer FFN with residual + LN.
struct AttentionBlockParams {
  Parameter wq, wk, wv;
  Parameter ln1_gamma, ln1_beta;
  Parameter ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  Parameter ln2_gamma, ln2_beta;
};

struct ModelParams {
  std::vector<Parameter> gcn;  // one weight per layer, no bias
  std::vector<GinLayerParams> gin;
  Parameter proj_w, proj_gamma, proj_beta;
  std::optional<AttentionBlockParams> aasa, anca, full;
  Parameter cls_w, cls_b;

  // Every parameter in a fixed order (backbone, projection, blocks,
  // classifier). Optimizer state and checkpoints rely on this order.
  std::vector<Parameter*> list();
  std::vector<const Parameter*> list() const;
  std::size_t scalar_count() const;
  void zero_grad();
};

// Glorot-uniform matrices, zero biases and LN beta, unit LN gamma, GIN eps 0.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

// Structure-only operators for one graph, computed once and reused by every
// forward pass (anchors are frozen before training).
struct PreparedGraph {
  Tensor features;
  SparseMatrix propagation;  // normalized adjacency (GCN) or 0/1 adjacency (GIN)
  std::optional<AnchorAssignment> anchors;
  SparseMatrix pooling;      // D^-1 S
  int label = 0;
};

// For AnchorMode::random the group count is taken from Louvain on the same
// graph and the partition is drawn with `partition_seed`.
PreparedGraph prepare_graph(const Graph& g, const ModelConfig& cfg, std::uint64_t partition_seed = 0);

// Attention matrices (before dropout) in evaluation order.
struct ForwardTrace {
  std::vector<Tensor> attention;
};

struct ForwardContext {
  ad::Tape& tape;
  Rng& rng;
  bool training = false;
  double dropout = 0.0;
  ForwardTrace* trace = nullptr;
};

ad::Var gcn_forward(ForwardContext& ctx, const ad::Var& x, const SparseMatrix& a_hat, std::vector<Parameter>& layers);
ad::Var gin_forward(ForwardContext& ctx, const ad::Var& x, const SparseMatrix& adjacency,
                    std::vector<GinLayerParams>& layers);
// LN(Z W_proj)
ad::Var project_embed(ForwardContext& ctx, const ad::Var& z, Parameter& w, Parameter& gamma, Parameter& beta);
// P = D^-1 S H
ad::Var anchor_features(const SparseMatrix& pooling, const ad::Var& h);

// Queries come from `query_src`, keys and values from `kv_src`; the residual
// adds onto `query_src`.
ad::Var attention_block(ForwardContext& ctx, const ad::Var& query_src, const ad::Var& kv_src,
                        AttentionBlockParams& p);
inline ad::Var aasa_block(ForwardContext& ctx, const ad::Var& anchors, AttentionBlockParams& p) {
  return attention_block(ctx, anchors, anchors, p);
}
inline ad::Var anca_block(ForwardContext& ctx, const ad::Var& nodes, const ad::Var& anchors, AttentionBlockParams& p) {
  return attention_block(ctx, nodes, anchors, p);
}
inline ad::Var full_attention_block(ForwardContext& ctx, const ad::Var& nodes, AttentionBlockParams& p) {
  return attention_block(ctx, nodes, nodes, p);
}

// Mean over node rows, then affine map to class logits (1 x num_classes).
ad::Var readout_classify(const ad::Var& h, Parameter& w, Parameter& b);

ad::Var model_forward(ForwardContext& ctx, const PreparedGraph& g, ModelParams& params, const ModelConfig& cfg);

}  // namespace agf
