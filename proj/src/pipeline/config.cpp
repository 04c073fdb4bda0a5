#include "depsev/pipeline/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "depsev/error.hpp"
#include "depsev/io.hpp"

namespace depsev::pipeline {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ArgumentError(key + ": not a number: '" + v + "'");
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ArgumentError(key + ": not an integer: '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ArgumentError(key + ": expected true or false, got '" + v + "'");
}

template <typename T, typename Fn>
std::vector<T> to_list(const std::string& v, Fn convert) {
  std::vector<T> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.push_back(convert(t));
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct Option {
  std::string key;
  Setter set;
  Getter get;
};

#define DEPSEV_DOUBLE(KEY, FIELD)                                                               \
  Option {                                                                                      \
    KEY, [](PipelineConfig& c, const std::string& k, const std::string& v) {                   \
      c.FIELD = to_double(k, v);                                                                \
    },                                                                                          \
        [](const PipelineConfig& c) { return format_double(c.FIELD); }                          \
  }
#define DEPSEV_INT(KEY, FIELD, TYPE)                                                            \
  Option {                                                                                      \
    KEY, [](PipelineConfig& c, const std::string& k, const std::string& v) {                   \
      c.FIELD = static_cast<TYPE>(to_integer(k, v));                                            \
    },                                                                                          \
        [](const PipelineConfig& c) { return std::to_string(c.FIELD); }                         \
  }
#define DEPSEV_TEXT(KEY, FIELD)                                                                 \
  Option {                                                                                      \
    KEY, [](PipelineConfig& c, const std::string&, const std::string& v) { c.FIELD = v; },     \
        [](const PipelineConfig& c) { return std::string(c.FIELD); }                            \
  }

const std::vector<Option>& options() {
  static const std::vector<Option> all = {
      DEPSEV_TEXT("run.corpus", corpus),
      DEPSEV_TEXT("run.output", output),
      DEPSEV_TEXT("run.modality", modality),
      DEPSEV_TEXT("run.model", model),
      Option{"run.seed",
             [](PipelineConfig& c, const std::string& k, const std::string& v) {
               if (v.empty()) {
                 c.seed.reset();
                 return;
               }
               const auto s = to_integer(k, v);
               if (s < 0) throw ArgumentError(k + " must be nonnegative");
               c.seed = static_cast<std::uint64_t>(s);
             },
             [](const PipelineConfig& c) { return c.seed ? std::to_string(*c.seed) : ""; }},
      DEPSEV_TEXT("svr.kernel", svr_kernel),
      DEPSEV_DOUBLE("svr.c", svr.c),
      DEPSEV_DOUBLE("svr.gamma", svr.gamma),
      DEPSEV_DOUBLE("svr.epsilon", svr.epsilon),
      DEPSEV_DOUBLE("svr.tolerance", svr.tolerance),
      DEPSEV_INT("svr.max_iterations", svr.max_iterations, long),
      DEPSEV_INT("reptree.min_leaf", reptree.min_leaf, int),
      DEPSEV_DOUBLE("reptree.prune_fraction", reptree.prune_fraction),
      DEPSEV_DOUBLE("reptree.min_variance_prop", reptree.min_variance_prop),
      DEPSEV_INT("reptree.max_depth", reptree.max_depth, int),
      Option{"reptree.prune",
             [](PipelineConfig& c, const std::string& k, const std::string& v) {
               c.reptree.prune = to_bool(k, v);
             },
             [](const PipelineConfig& c) { return std::string(c.reptree.prune ? "true" : "false"); }},
      DEPSEV_INT("lstm.hidden", lstm.hidden, int),
      DEPSEV_DOUBLE("lstm.dropout", lstm.dropout),
      DEPSEV_DOUBLE("lstm.learning_rate", lstm.learning_rate),
      DEPSEV_INT("lstm.batch_size", lstm.batch_size, int),
      DEPSEV_DOUBLE("lstm.clip_norm", lstm.clip_norm),
      DEPSEV_INT("lstm.epochs", lstm.epochs, int),
      DEPSEV_DOUBLE("lstm.bn_momentum", lstm.bn_momentum),
      DEPSEV_DOUBLE("lstm.bn_epsilon", lstm.bn_epsilon),
      DEPSEV_DOUBLE("lstm.adam_beta1", lstm.adam_beta1),
      DEPSEV_DOUBLE("lstm.adam_beta2", lstm.adam_beta2),
      DEPSEV_DOUBLE("lstm.adam_epsilon", lstm.adam_epsilon),
      DEPSEV_DOUBLE("lstm.validation_fraction", lstm_validation_fraction),
      Option{"relief.thresholds",
             [](PipelineConfig& c, const std::string& k, const std::string& v) {
               c.relief.thresholds =
                   to_list<double>(v, [&](const std::string& s) { return to_double(k, s); });
             },
             [](const PipelineConfig& c) { return join(c.relief.thresholds); }},
      Option{"relief.ks",
             [](PipelineConfig& c, const std::string& k, const std::string& v) {
               c.relief.ks = to_list<int>(
                   v, [&](const std::string& s) { return static_cast<int>(to_integer(k, s)); });
             },
             [](const PipelineConfig& c) { return join(c.relief.ks); }},
      DEPSEV_INT("relief.n_max", relief.n_max, int),
      DEPSEV_INT("relief.folds", relief.folds, int),
      DEPSEV_INT("face.window", window.window, int),
      DEPSEV_INT("face.overlap", window.overlap, int),
      DEPSEV_DOUBLE("face.pca_variance", pca_variance),
      DEPSEV_TEXT("behavior.lexicon", lexicon),
      DEPSEV_TEXT("text.embeddings", embeddings),
  };
  return all;
}

#undef DEPSEV_DOUBLE
#undef DEPSEV_INT
#undef DEPSEV_TEXT

}  // namespace

Modality parse_modality(const std::string& text) {
  Modality m;
  if (text == "behavioral") {
    m.kind = ModalityKind::Behavioral;
  } else if (text == "visual") {
    m.kind = ModalityKind::Visual;
  } else if (text.rfind("acoustic:", 0) == 0) {
    m.kind = ModalityKind::Acoustic;
    auto group = text.substr(9);
    if (group == "M+FS") {
      m.feature_selection = true;
      group = "M";
    }
    m.group = audio::parse_acoustic_group(group);
  } else if (text.rfind("text:", 0) == 0) {
    m.kind = ModalityKind::Text;
    const auto mode = text.substr(5);
    if (mode == "BOOL") {
      m.text = TextMode::Bool;
    } else if (mode == "TFIDF") {
      m.text = TextMode::TfIdf;
    } else if (mode == "WE") {
      m.text = TextMode::Embedding;
    } else {
      throw ArgumentError("unknown text representation '" + mode + "' (BOOL, TFIDF, WE)");
    }
  } else {
    throw ArgumentError("unknown modality '" + text +
                        "' (acoustic:S|P|VQ|M|M+FS, behavioral, text:BOOL|TFIDF|WE, visual)");
  }
  return m;
}

std::string to_string(const Modality& m) {
  switch (m.kind) {
    case ModalityKind::Acoustic:
      return "acoustic:" + audio::to_string(m.group) + (m.feature_selection ? "+FS" : "");
    case ModalityKind::Behavioral:
      return "behavioral";
    case ModalityKind::Text:
      return m.text == TextMode::Bool ? "text:BOOL" : m.text == TextMode::TfIdf ? "text:TFIDF" : "text:WE";
    case ModalityKind::Visual:
      return "visual";
  }
  return "?";
}

std::string feature_store_name(const Modality& m) {
  switch (m.kind) {
    case ModalityKind::Acoustic:
      return "acoustic_" + audio::to_string(m.group);
    case ModalityKind::Behavioral:
      return "behavioral";
    case ModalityKind::Text:
      return m.text == TextMode::Bool ? "text_BOOL" : m.text == TextMode::TfIdf ? "text_TFIDF" : "text_WE";
    case ModalityKind::Visual:
      return "visual";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "svr") return ModelKind::Svr;
  if (text == "reptree") return ModelKind::RepTree;
  if (text == "lstm") return ModelKind::Lstm;
  throw ArgumentError("unknown model '" + text + "' (svr, reptree, lstm)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Svr:
      return "svr";
    case ModelKind::RepTree:
      return "reptree";
    case ModelKind::Lstm:
      return "lstm";
  }
  return "?";
}

ModelKind default_model(const Modality& m) {
  switch (m.kind) {
    case ModalityKind::Acoustic:
    case ModalityKind::Text:
      return ModelKind::Svr;
    case ModalityKind::Behavioral:
      return ModelKind::RepTree;
    case ModalityKind::Visual:
      return ModelKind::Lstm;
  }
  return ModelKind::RepTree;
}

models::KernelType default_kernel(const Modality& m) {
  return m.kind == ModalityKind::Text ? models::KernelType::Linear : models::KernelType::Rbf;
}

void set_option(PipelineConfig& config, const std::string& key, const std::string& value) {
  for (const auto& o : options()) {
    if (o.key == key) {
      o.set(config, key, value);
      return;
    }
  }
  throw ArgumentError("unknown configuration key '" + key + "'");
}

PipelineConfig parse_config(std::string_view content, const std::string& source) {
  PipelineConfig config;
  std::istringstream in{std::string(content)};
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError(source, line_no, "unterminated section header");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key = value");
    if (section.empty()) throw ParseError(source, line_no, "key outside of a [section]");
    const auto key = section + "." + trim(std::string_view(body).substr(0, eq));
    try {
      set_option(config, key, trim(std::string_view(body).substr(eq + 1)));
    } catch (const ArgumentError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.string());
}

std::string format_config(const PipelineConfig& config) {
  std::string out;
  std::string section;
  for (const auto& o : options()) {
    const auto dot = o.key.find('.');
    const auto s = o.key.substr(0, dot);
    if (s != section) {
      out += (section.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += o.key.substr(dot + 1) + " = " + o.get(config) + "\n";
  }
  return out;
}

ResolvedConfig resolve(const PipelineConfig& config) {
  ResolvedConfig r;
  r.raw = config;
  if (!config.seed) throw ArgumentError("run.seed is mandatory");
  r.seed = *config.seed;
  r.modality = parse_modality(config.modality);
  const auto preferred = default_model(r.modality);
  r.model = config.model == "auto" ? preferred : parse_model_kind(config.model);
  const bool sequence_model = r.model == ModelKind::Lstm;
  if (sequence_model == r.modality.tabular()) {
    throw ArgumentError("model '" + to_string(r.model) + "' cannot consume modality '" +
                        to_string(r.modality) + "'");
  }
  if (r.model != preferred) {
    r.warnings.push_back("modality " + to_string(r.modality) + " normally uses " +
                         to_string(preferred) + "; running " + to_string(r.model));
  }
  const auto kernel = default_kernel(r.modality);
  if (config.svr_kernel == "auto") {
    r.raw.svr.kernel = kernel;
  } else {
    r.raw.svr.kernel = models::parse_kernel(config.svr_kernel);
    if (r.model == ModelKind::Svr && r.raw.svr.kernel != kernel) {
      r.warnings.push_back("modality " + to_string(r.modality) + " normally uses the " +
                           models::to_string(kernel) + " kernel; running " +
                           models::to_string(r.raw.svr.kernel));
    }
  }
  r.raw.lstm.seed = r.seed;
  if (r.raw.svr.c <= 0.0 || r.raw.svr.gamma <= 0.0 || r.raw.svr.epsilon < 0.0) {
    throw ArgumentError("svr: need c > 0, gamma > 0, epsilon >= 0");
  }
  if (r.raw.reptree.min_leaf < 1 || r.raw.reptree.prune_fraction <= 0.0 ||
      r.raw.reptree.prune_fraction >= 1.0) {
    throw ArgumentError("reptree: need min_leaf >= 1 and 0 < prune_fraction < 1");
  }
  if (r.raw.lstm.hidden < 1 || r.raw.lstm.batch_size < 1 || r.raw.lstm.epochs < 0 ||
      r.raw.lstm.dropout < 0.0 || r.raw.lstm.dropout >= 1.0 || r.raw.lstm.learning_rate <= 0.0) {
    throw ArgumentError("lstm: need hidden >= 1, batch_size >= 1, epochs >= 0, 0 <= dropout < 1, learning_rate > 0");
  }
  if (r.raw.lstm_validation_fraction < 0.0 || r.raw.lstm_validation_fraction >= 1.0) {
    throw ArgumentError("lstm.validation_fraction must be in [0, 1)");
  }
  if (r.raw.window.window < 1 || r.raw.window.overlap < 0 ||
      r.raw.window.overlap >= r.raw.window.window) {
    throw ArgumentError("face: need window >= 1 and 0 <= overlap < window");
  }
  if (r.raw.pca_variance <= 0.0 || r.raw.pca_variance > 1.0) {
    throw ArgumentError("face.pca_variance must be in (0, 1]");
  }
  if (r.raw.relief.thresholds.empty() || r.raw.relief.ks.empty() || r.raw.relief.folds < 2 ||
      r.raw.relief.n_max < 1) {
    throw ArgumentError("relief: need thresholds, ks, folds >= 2 and n_max >= 1");
  }
  if (r.modality.kind == ModalityKind::Text && r.modality.text == TextMode::Embedding &&
      config.embeddings.empty()) {
    throw ArgumentError("text:WE needs text.embeddings");
  }
  return r;
}

}  // namespace depsev::pipeline
