#include "agformer/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "agformer/errors.hpp"

namespace agf {

std::string to_string(Backbone b) { return b == Backbone::gcn ? "gcn" : "gin"; }

std::string to_string(AnchorMode m) {
  switch (m) {
    case AnchorMode::louvain: return "louvain";
    case AnchorMode::random: return "random";
    case AnchorMode::full: return "full";
  }
  return "?";
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Backbone parse_backbone(const std::string& raw) {
  const std::string s = lower(raw);
  if (s == "gcn") return Backbone::gcn;
  if (s == "gin") return Backbone::gin;
  throw ConfigError("unknown backbone '" + s + "' (expected gcn or gin)");
}

AnchorMode parse_anchor_mode(const std::string& raw) {
  const std::string s = lower(raw);
  if (s == "louvain") return AnchorMode::louvain;
  if (s == "random") return AnchorMode::random;
  if (s == "full") return AnchorMode::full;
  throw ConfigError("unknown anchor mode '" + s + "' (expected louvain, random or full)");
}

void ModelConfig::validate() const {
  if (input_dim == 0 || hidden_dim == 0 || proj_dim == 0 || ffn_hidden == 0 || num_classes == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (num_gnn_layers == 0) throw ConfigError("need at least one GNN layer");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(fan_in, fan_out);
  for (double& v : t.data()) v = (2.0 * uniform01(rng) - 1.0) * limit;
  return t;
}

AttentionBlockParams init_block(const std::string& prefix, std::size_t d, std::size_t ffn, Rng& rng) {
  AttentionBlockParams p;
  p.wq = Parameter(prefix + ".wq", glorot(d, d, rng));
  p.wk = Parameter(prefix + ".wk", glorot(d, d, rng));
  p.wv = Parameter(prefix + ".wv", glorot(d, d, rng));
  p.ln1_gamma = Parameter(prefix + ".ln1.gamma", Tensor::ones(1, d));
  p.ln1_beta = Parameter(prefix + ".ln1.beta", Tensor::zeros(1, d));
  p.ffn_w1 = Parameter(prefix + ".ffn.w1", glorot(d, ffn, rng));
  p.ffn_b1 = Parameter(prefix + ".ffn.b1", Tensor::zeros(1, ffn));
  p.ffn_w2 = Parameter(prefix + ".ffn.w2", glorot(ffn, d, rng));
  p.ffn_b2 = Parameter(prefix + ".ffn.b2", Tensor::zeros(1, d));
  p.ln2_gamma = Parameter(prefix + ".ln2.gamma", Tensor::ones(1, d));
  p.ln2_beta = Parameter(prefix + ".ln2.beta", Tensor::zeros(1, d));
  return p;
}

void append_block(std::vector<Parameter*>& out, AttentionBlockParams& p) {
  for (Parameter* q : {&p.wq, &p.wk, &p.wv, &p.ln1_gamma, &p.ln1_beta, &p.ffn_w1, &p.ffn_b1, &p.ffn_w2, &p.ffn_b2,
                       &p.ln2_gamma, &p.ln2_beta}) {
    out.push_back(q);
  }
}

}  // namespace

std::vector<Parameter*> ModelParams::list() {
  std::vector<Parameter*> out;
  for (auto& w : gcn) out.push_back(&w);
  for (auto& l : gin) {
    for (Parameter* q : {&l.eps, &l.w1, &l.b1, &l.w2, &l.b2}) out.push_back(q);
  }
  out.push_back(&proj_w);
  out.push_back(&proj_gamma);
  out.push_back(&proj_beta);
  if (aasa) append_block(out, *aasa);
  if (anca) append_block(out, *anca);
  if (full) append_block(out, *full);
  out.push_back(&cls_w);
  out.push_back(&cls_b);
  return out;
}

std::vector<const Parameter*> ModelParams::list() const {
  auto mutable_list = const_cast<ModelParams*>(this)->list();
  return {mutable_list.begin(), mutable_list.end()};
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const Parameter* p : list()) n += p->value.numel();
  return n;
}

void ModelParams::zero_grad() {
  for (Parameter* p : list()) p->zero_grad();
}

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ModelParams p;
  std::size_t in = cfg.input_dim;
  for (std::size_t l = 0; l < cfg.num_gnn_layers; ++l) {
    const std::string prefix = "backbone." + std::to_string(l);
    if (cfg.backbone == Backbone::gcn) {
      p.gcn.emplace_back(prefix + ".w", glorot(in, cfg.hidden_dim, rng));
    } else {
      GinLayerParams layer;
      layer.eps = Parameter(prefix + ".eps", Tensor::zeros(1, 1));
      layer.w1 = Parameter(prefix + ".w1", glorot(in, cfg.hidden_dim, rng));
      layer.b1 = Parameter(prefix + ".b1", Tensor::zeros(1, cfg.hidden_dim));
      layer.w2 = Parameter(prefix + ".w2", glorot(cfg.hidden_dim, cfg.hidden_dim, rng));
      layer.b2 = Parameter(prefix + ".b2", Tensor::zeros(1, cfg.hidden_dim));
      p.gin.push_back(std::move(layer));
    }
    in = cfg.hidden_dim;
  }
  p.proj_w = Parameter("proj.w", glorot(cfg.hidden_dim, cfg.proj_dim, rng));
  p.proj_gamma = Parameter("proj.ln.gamma", Tensor::ones(1, cfg.proj_dim));
  p.proj_beta = Parameter("proj.ln.beta", Tensor::zeros(1, cfg.proj_dim));
  if (cfg.anchor_mode == AnchorMode::full) {
    p.full = init_block("full", cfg.proj_dim, cfg.ffn_hidden, rng);
  } else {
    p.aasa = init_block("aasa", cfg.proj_dim, cfg.ffn_hidden, rng);
    p.anca = init_block("anca", cfg.proj_dim, cfg.ffn_hidden, rng);
  }
  p.cls_w = Parameter("cls.w", glorot(cfg.proj_dim, cfg.num_classes, rng));
  p.cls_b = Parameter("cls.b", Tensor::zeros(1, cfg.num_classes));
  return p;
}

PreparedGraph prepare_graph(const Graph& g, const ModelConfig& cfg, std::uint64_t partition_seed) {
  PreparedGraph out;
  out.features = g.features();
  out.label = g.label();
  out.propagation = cfg.backbone == Backbone::gcn ? normalized_adjacency(g) : adjacency_operator(g);
  if (cfg.anchor_mode != AnchorMode::full) {
    Partition part = louvain(g);
    if (cfg.anchor_mode == AnchorMode::random) {
      part = random_partition(g.num_nodes(), part.num_communities, partition_seed);
    }
    out.anchors = assignment_matrix(part);
    out.pooling = out.anchors->mean_pooling();
  }
  return out;
}

ad::Var gcn_forward(ForwardContext& ctx, const ad::Var& x, const SparseMatrix& a_hat, std::vector<Parameter>& layers) {
  ad::Var h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (h.shape().cols != layers[l].value.rows()) {
      throw ShapeError("gcn layer " + std::to_string(l) + ": input " + h.shape().str() + " vs weight " +
                       layers[l].value.shape().str());
    }
    h = ad::spmm(a_hat, ad::matmul(h, ctx.tape.param(layers[l])));
    if (l + 1 < layers.size()) h = ad::dropout(ad::relu(h), ctx.dropout, ctx.rng, ctx.training);
  }
  return h;
}

ad::Var gin_forward(ForwardContext& ctx, const ad::Var& x, const SparseMatrix& adjacency,
                    std::vector<GinLayerParams>& layers) {
  ad::Var h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    GinLayerParams& p = layers[l];
    if (h.shape().cols != p.w1.value.rows()) {
      throw ShapeError("gin layer " + std::to_string(l) + ": input " + h.shape().str() + " vs weight " +
                       p.w1.value.shape().str());
    }
    // (1 + eps) h + sum of neighbors
    const ad::Var agg = ad::add(ad::add(h, ad::mul_scalar(ctx.tape.param(p.eps), h)), ad::spmm(adjacency, h));
    ad::Var hidden = ad::relu(ad::bias_add(ad::matmul(agg, ctx.tape.param(p.w1)), ctx.tape.param(p.b1)));
    h = ad::bias_add(ad::matmul(hidden, ctx.tape.param(p.w2)), ctx.tape.param(p.b2));
    if (l + 1 < layers.size()) h = ad::dropout(ad::relu(h), ctx.dropout, ctx.rng, ctx.training);
  }
  return h;
}

ad::Var project_embed(ForwardContext& ctx, const ad::Var& z, Parameter& w, Parameter& gamma, Parameter& beta) {
  return ad::layer_norm_rows(ad::matmul(z, ctx.tape.param(w)), ctx.tape.param(gamma), ctx.tape.param(beta));
}

ad::Var anchor_features(const SparseMatrix& pooling, const ad::Var& h) {
  if (pooling.cols != h.shape().rows) {
    throw ShapeError("anchor_features: assignment covers " + std::to_string(pooling.cols) + " nodes, H has " +
                     std::to_string(h.shape().rows));
  }
  return ad::spmm(pooling, h);
}

ad::Var attention_block(ForwardContext& ctx, const ad::Var& query_src, const ad::Var& kv_src,
                        AttentionBlockParams& p) {
  if (query_src.shape().cols != kv_src.shape().cols) {
    throw ShapeError("attention: query width " + query_src.shape().str() + " vs key/value width " +
                     kv_src.shape().str());
  }
  ad::Tape& t = ctx.tape;
  const double d = static_cast<double>(query_src.shape().cols);
  const ad::Var q = ad::matmul(query_src, t.param(p.wq));
  const ad::Var k = ad::matmul(kv_src, t.param(p.wk));
  const ad::Var v = ad::matmul(kv_src, t.param(p.wv));
  ad::Var weights = ad::softmax_rows(ad::matmul_nt(q, k, 1.0 / std::sqrt(d)));
  if (ctx.trace != nullptr) ctx.trace->attention.push_back(weights.value());
  weights = ad::dropout(weights, ctx.dropout, ctx.rng, ctx.training);
  const ad::Var attended = ad::matmul(weights, v);
  const ad::Var mid = ad::layer_norm_rows(ad::add(query_src, attended), t.param(p.ln1_gamma), t.param(p.ln1_beta));
  ad::Var hidden = ad::relu(ad::bias_add(ad::matmul(mid, t.param(p.ffn_w1)), t.param(p.ffn_b1)));
  hidden = ad::dropout(hidden, ctx.dropout, ctx.rng, ctx.training);
  const ad::Var ffn = ad::bias_add(ad::matmul(hidden, t.param(p.ffn_w2)), t.param(p.ffn_b2));
  return ad::layer_norm_rows(ad::add(mid, ffn), t.param(p.ln2_gamma), t.param(p.ln2_beta));
}

ad::Var readout_classify(const ad::Var& h, Parameter& w, Parameter& b) {
  ad::Tape& t = *h.tape();
  return ad::bias_add(ad::matmul(ad::mean_rows(h), t.param(w)), t.param(b));
}

ad::Var model_forward(ForwardContext& ctx, const PreparedGraph& g, ModelParams& params, const ModelConfig& cfg) {
  const ad::Var x = ctx.tape.constant(g.features);
  const ad::Var z = cfg.backbone == Backbone::gcn ? gcn_forward(ctx, x, g.propagation, params.gcn)
                                                  : gin_forward(ctx, x, g.propagation, params.gin);
  const ad::Var h = project_embed(ctx, z, params.proj_w, params.proj_gamma, params.proj_beta);
  ad::Var out;
  if (cfg.anchor_mode == AnchorMode::full) {
    if (!params.full) throw ConfigError("full-baseline mode needs full-attention parameters");
    out = full_attention_block(ctx, h, *params.full);
  } else {
    if (!g.anchors) throw ConfigError("anchor mode needs a graph prepared with anchors");
    if (!params.aasa || !params.anca) throw ConfigError("anchor mode needs AASA and ANCA parameters");
    const ad::Var anchors = anchor_features(g.pooling, h);
    const ad::Var refined = aasa_block(ctx, anchors, *params.aasa);
    out = anca_block(ctx, h, refined, *params.anca);
  }
  return readout_classify(out, params.cls_w, params.cls_b);
}

}  // namespace agf
