#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depsev/audio/acoustic_vector.hpp"
#include "depsev/face.hpp"
#include "depsev/models/lstm.hpp"
#include "depsev/models/reptree.hpp"
#include "depsev/models/svr.hpp"
#include "depsev/relief.hpp"
#include "depsev/text.hpp"

namespace depsev::pipeline {

enum class ModalityKind { Acoustic, Behavioral, Text, Visual };
enum class TextMode { Bool, TfIdf, Embedding };
enum class ModelKind { Svr, RepTree, Lstm };

struct Modality {
  ModalityKind kind = ModalityKind::Behavioral;
  audio::AcousticGroup group = audio::AcousticGroup::M;
  bool feature_selection = false;  // acoustic M+FS
  TextMode text = TextMode::TfIdf;

  bool tabular() const { return kind != ModalityKind::Visual; }
};

// acoustic:S|P|VQ|M|M+FS, behavioral, text:BOOL|TFIDF|WE, visual
Modality parse_modality(const std::string& text);
std::string to_string(const Modality& modality);
// Name of the feature store written by extraction, e.g. "acoustic_M".
std::string feature_store_name(const Modality& modality);

ModelKind parse_model_kind(const std::string& text);
std::string to_string(ModelKind kind);
ModelKind default_model(const Modality& modality);
models::KernelType default_kernel(const Modality& modality);

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path output;
  std::string modality = "behavioral";
  std::string model = "auto";
  std::optional<std::uint64_t> seed;

  std::string svr_kernel = "auto";
  models::SvrConfig svr;
  models::RepTreeConfig reptree;
  models::LstmConfig lstm;
  // Fraction of training sessions held out for LSTM early stopping.
  double lstm_validation_fraction = 0.2;

  selection::ReliefGrid relief;
  face::WindowConfig window;
  double pca_variance = 0.995;

  std::filesystem::path lexicon;
  std::filesystem::path embeddings;
};

// Parsed, validated view of a PipelineConfig.
struct ResolvedConfig {
  PipelineConfig raw;
  Modality modality;
  ModelKind model = ModelKind::RepTree;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

// Section-qualified assignment such as "svr.c" = "1.0" or "run.seed" = "7".
void set_option(PipelineConfig& config, const std::string& key, const std::string& value);

PipelineConfig parse_config(std::string_view content, const std::string& source = "<memory>");
PipelineConfig load_config(const std::filesystem::path& path);
// Every key with its current value, in a form parse_config accepts.
std::string format_config(const PipelineConfig& config);

// Throws ArgumentError on invalid values, a missing seed, or a non-tabular
// model paired with a tabular modality (and vice versa). Departures from the
// default modality/model pairing are allowed and reported as warnings.
ResolvedConfig resolve(const PipelineConfig& config);

}  // namespace depsev::pipeline
