#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "json_util.hpp"
#include "pdpp/diffusion.hpp"
#include "pdpp/error.hpp"

namespace pdpp {
namespace {

using detail::Json;
using detail::ObjectReader;

// Relative diagonal jitter for kernels whose candidates coincide exactly.
constexpr double kDecodeJitter = 1e-9;

template <class E, std::size_t N>
E parse_choice(ObjectReader& r, const std::string& key, E fallback,
               const std::pair<std::string_view, E> (&table)[N]) {
  if (!r.has(key)) return fallback;
  const std::string s = r.string(key);
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  std::string expected;
  for (std::size_t i = 0; i < N; ++i) {
    expected += (i ? ", " : "") + std::string(table[i].first);
  }
  ObjectReader::fail(r.at(key), "unknown value '" + s + "' (expected one of " + expected + ")");
}

constexpr std::pair<std::string_view, ProjectorKind> kProjectors[] = {
    {"llada_uniform", ProjectorKind::llada_uniform},
    {"llada_low_confidence", ProjectorKind::llada_low_confidence},
    {"mdlm", ProjectorKind::mdlm},
};
constexpr std::pair<std::string_view, ScorerKind> kScorers[] = {
    {"entropy", ScorerKind::entropy},
    {"self_certainty", ScorerKind::self_certainty},
};
constexpr std::pair<std::string_view, SimilarityKind> kSimilarities[] = {
    {"cosine", SimilarityKind::cosine},
    {"rbf", SimilarityKind::rbf},
};
constexpr std::pair<std::string_view, SelectorKind> kSelectors[] = {
    {"d5p4", SelectorKind::d5p4},
    {"greedy_map_multi", SelectorKind::d5p4},
    {"topk", SelectorKind::topk},
    {"mmr", SelectorKind::mmr},
    {"divbs", SelectorKind::mmr},
    {"random", SelectorKind::random},
};
constexpr std::pair<std::string_view, KernelVariant> kVariants[] = {
    {"additive", KernelVariant::additive},
    {"multiplicative", KernelVariant::multiplicative},
};
constexpr std::pair<std::string_view, MultiInitStarts> kStarts[] = {
    {"all_items", MultiInitStarts::all_items},
    {"group_argmax", MultiInitStarts::group_argmax},
};
constexpr std::pair<std::string_view, ModelSpec::Kind> kModels[] = {
    {"toy", ModelSpec::Kind::toy},
    {"uniform", ModelSpec::Kind::uniform},
    {"random", ModelSpec::Kind::random},
    {"explicit", ModelSpec::Kind::explicit_chain},
};

ModelSpec model_from_json(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  ModelSpec m;
  m.kind = parse_choice(r, "type", m.kind, kModels);
  m.vocab_size = r.unsigned_int("vocab_size", m.vocab_size);
  m.seed = r.unsigned_int("seed", m.seed);
  m.concentration = r.number("concentration", m.concentration);
  if (r.has("initial")) m.initial = r.numbers("initial");
  if (r.has("transition")) {
    const Json& rows = r.raw("transition");
    if (!rows.is_array()) ObjectReader::fail(r.at("transition"), "expected an array of rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string row_path = r.at("transition") + "[" + std::to_string(i) + "]";
      if (!rows[i].is_array()) ObjectReader::fail(row_path, "expected an array of numbers");
      for (std::size_t c = 0; c < rows[i].size(); ++c) {
        if (!rows[i][c].is_number()) {
          ObjectReader::fail(row_path + "[" + std::to_string(c) + "]", "expected a number");
        }
        m.transition.push_back(rows[i][c].get<double>());
      }
    }
  }
  r.finish();
  if (m.kind == ModelSpec::Kind::explicit_chain && (m.initial.empty() || m.transition.empty())) {
    ObjectReader::fail(path, "an explicit chain needs both 'initial' and 'transition'");
  }
  try {
    m.build(1);
  } catch (const InvalidInput& e) {
    ObjectReader::fail(path, e.what());
  }
  return m;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

std::string_view to_string(ProjectorKind p) noexcept {
  for (const auto& [name, value] : kProjectors) if (value == p) return name;
  return "unknown";
}
std::string_view to_string(ScorerKind s) noexcept {
  for (const auto& [name, value] : kScorers) if (value == s) return name;
  return "unknown";
}
std::string_view to_string(SimilarityKind s) noexcept {
  for (const auto& [name, value] : kSimilarities) if (value == s) return name;
  return "unknown";
}
std::string_view to_string(SelectorKind s) noexcept {
  for (const auto& [name, value] : kSelectors) if (value == s) return name;
  return "unknown";
}

OracleDenoiser ModelSpec::build(std::size_t length) const {
  switch (kind) {
    case Kind::toy: return OracleDenoiser::toy_chain(length);
    case Kind::uniform: return OracleDenoiser::uniform(vocab_size, length);
    case Kind::random: return OracleDenoiser::random(vocab_size, length, seed, concentration);
    case Kind::explicit_chain: return OracleDenoiser(initial.size(), length, initial, transition);
  }
  throw InvalidInput("unknown model type");
}

void DecodeConfig::validate() const {
  if (k == 0 || w == 0) throw InvalidInput("config.k and config.w must be >= 1");
  if (steps == 0) throw InvalidInput("config.steps must be >= 1");
  if (length == 0) throw InvalidInput("config.length must be >= 1");
  if (prompt.size() >= length) throw InvalidInput("config.prompt must be shorter than config.length");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidInput("config.beta must be >= 0");
  if (variant == KernelVariant::multiplicative && !(beta > 0.0)) {
    throw InvalidInput("config.beta must be > 0 for the multiplicative kernel");
  }
  if (gamma && !(*gamma > 0.0)) throw InvalidInput("config.gamma must be > 0");
  if (!(alpha_div >= 0.0)) throw InvalidInput("config.alpha_div must be >= 0");
  for (double b : sweep_betas) {
    if (!(b > 0.0) || !std::isfinite(b)) throw InvalidInput("config.sweep.betas must be > 0");
  }
  if (!sweep_betas.empty() && sweep_seeds == 0) {
    throw InvalidInput("config.sweep.seeds must be >= 1");
  }
}

DecodeConfig decode_config_from_json(std::string_view json_text) {
  const Json j = detail::parse_json(json_text, "decode config");
  ObjectReader r(j, "config");
  DecodeConfig cfg;
  cfg.k = r.unsigned_int("k", cfg.k);
  cfg.w = r.unsigned_int("w", cfg.w);
  cfg.length = r.unsigned_int("length", cfg.length);
  cfg.steps = r.unsigned_int("steps", cfg.steps);
  cfg.beta = r.number("beta", cfg.beta);
  cfg.variant = parse_choice(r, "kernel", cfg.variant, kVariants);
  cfg.similarity = parse_choice(r, "similarity", cfg.similarity, kSimilarities);
  if (r.has("gamma")) cfg.gamma = r.number("gamma");
  cfg.projector = parse_choice(r, "projector", cfg.projector, kProjectors);
  cfg.scorer = parse_choice(r, "scorer", cfg.scorer, kScorers);
  cfg.selector = parse_choice(r, "selector", cfg.selector, kSelectors);
  cfg.starts = parse_choice(r, "multi_init_starts", cfg.starts, kStarts);
  cfg.alpha_div = r.number("alpha_div", cfg.alpha_div);
  cfg.seed = r.unsigned_int("seed", cfg.seed);
  if (r.has("prompt")) {
    for (std::uint64_t t : r.unsigned_ints("prompt")) cfg.prompt.push_back(static_cast<Token>(t));
  }
  if (r.has("model")) cfg.model = model_from_json(r.raw("model"), r.at("model"));
  if (r.has("sweep")) {
    ObjectReader s(r.raw("sweep"), r.at("sweep"));
    cfg.sweep_betas = s.numbers("betas");
    cfg.sweep_seeds = s.unsigned_int("seeds");
    s.finish();
  }
  r.finish();
  cfg.validate();
  return cfg;
}

DecodeResult decode(const OracleDenoiser& model, const DecodeConfig& cfg) {
  cfg.validate();
  if (model.length() != cfg.length) {
    throw InvalidInput("model length " + std::to_string(model.length()) +
                       " differs from config.length " + std::to_string(cfg.length));
  }
  const Vocab& vocab = model.vocab();
  for (Token t : cfg.prompt) {
    if (t >= vocab.size) throw InvalidInput("config.prompt token " + std::to_string(t) + " is out of vocabulary");
  }

  const std::size_t k = cfg.k;
  const std::size_t w = cfg.w;
  const std::size_t n = k * w;
  const Partition partition(k, w);
  const Schedule schedule = Schedule::uniform(cfg.steps);

  std::vector<LatentState> beams(k, fully_masked(vocab, cfg.length, cfg.prompt));
  DecodeResult result;
  std::vector<std::vector<double>> embeddings(n);

  for (std::size_t step = 0; step < schedule.steps(); ++step) {
    const double t = schedule[step];
    const double s = schedule[step + 1];

    std::vector<LatentState> candidates;
    candidates.reserve(n);
    for (std::size_t parent = 0; parent < k; ++parent) {
      const DenoiserOutput out = denoise(model, beams[parent]);
      for (std::size_t r = 0; r < w; ++r) {
        Rng rng(derive_seed(cfg.seed, {step, parent, r}));
        switch (cfg.projector) {
          case ProjectorKind::llada_uniform:
            candidates.push_back(project_llada(out, beams[parent], s, LladaMode::uniform, rng));
            break;
          case ProjectorKind::llada_low_confidence:
            candidates.push_back(
                project_llada(out, beams[parent], s, LladaMode::low_confidence, rng));
            break;
          case ProjectorKind::mdlm:
            candidates.push_back(project_mdlm(out, beams[parent], s, rng));
            break;
        }
      }
    }

    std::vector<double> scores(n);
    const std::size_t dim = cfg.length * vocab.size;
    std::vector<double> flat(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
      const DenoiserOutput out = denoise(model, candidates[i]);
      scores[i] = cfg.scorer == ScorerKind::entropy ? entropy_score(out, candidates[i])
                                                    : self_certainty_score(out, candidates[i]);
      std::copy(out.probs.begin(), out.probs.end(), flat.begin() + i * dim);
      embeddings[i] = out.probs;
    }

    const QualityVector q(scores);
    const EmbeddingSet e(n, dim, std::move(flat));
    const EmbeddingSet e_hat = e.normalized_copy();
    const SimilarityMatrix sim =
        cfg.similarity == SimilarityKind::cosine
            ? cosine_similarity(e_hat)
            : rbf_similarity(e_hat, cfg.gamma.value_or(1.0 / static_cast<double>(dim)));
    const LEnsemble ens = cfg.variant == KernelVariant::additive
                              ? additive_kernel(q.shifted_nonnegative(), sim, cfg.beta, partition)
                              : multiplicative_kernel(q, sim, cfg.beta, partition);

    SelectionResult sel;
    switch (cfg.selector) {
      case SelectorKind::d5p4:
        try {
          sel = greedy_map_multi_init(ens, cfg.starts);
        } catch (const RankDeficient&) {
          // Exact duplicates among candidates; break the tie with a tiny ridge.
          SymMatrix jittered = ens.kernel();
          const double ridge = kDecodeJitter * std::max(jittered.max_abs(), 1.0);
          std::vector<double> add(n, ridge);
          jittered.add_to_diagonal(add);
          const LEnsemble ridged(std::move(jittered), partition, ens.variant(), ens.beta());
          sel = greedy_map_multi_init(ridged, cfg.starts);
          sel.log_det = evaluate_log_det(ens, sel.indices);
        }
        break;
      case SelectorKind::topk:
        sel = topk_per_group(q, partition, &ens);
        break;
      case SelectorKind::mmr:
        sel = mmr_select(q, sim, partition, cfg.alpha_div, true, &ens);
        break;
      case SelectorKind::random:
        sel = random_transversal(partition, derive_seed(cfg.seed, {step, n}), &ens);
        break;
    }

    DecodeStep record;
    record.t = t;
    record.s = s;
    record.scores = scores;
    record.selected = sel.indices;
    std::sort(record.selected.begin(), record.selected.end());
    record.log_det = sel.log_det;

    std::vector<LatentState> next;
    next.reserve(k);
    for (std::size_t idx : record.selected) next.push_back(candidates[idx]);
    beams = std::move(next);
    if (step + 1 == schedule.steps()) {
      for (std::size_t idx : record.selected) result.embeddings.push_back(embeddings[idx]);
    }
    result.trace.push_back(std::move(record));
  }

  for (const LatentState& b : beams) result.sequences.push_back(b.tokens);
  return result;
}

std::string trace_to_json(const DecodeResult& r) {
  Json steps = Json::array();
  for (const DecodeStep& st : r.trace) {
    Json scores = Json::array();
    for (double x : st.scores) scores.push_back(finite_or_null(x));
    steps.push_back({{"t", st.t},
                     {"s", st.s},
                     {"scores", scores},
                     {"selected", st.selected},
                     {"log_det", finite_or_null(st.log_det)}});
  }
  Json doc = {{"steps", steps}, {"sequences", r.sequences}};
  return doc.dump(2) + "\n";
}

std::string sequences_to_text(const DecodeResult& r) {
  std::string out;
  for (const auto& seq : r.sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(seq[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace pdpp
