#pragma once

#include <span>
#include <string>
#include <vector>

#include "ember/components.hpp"
#include "ember/model/config.hpp"
#include "ember/numerics/params.hpp"
#include "ember/numerics/tape.hpp"

namespace ember::model {

// Output of one intra-component extractor: a sequence of 2h-wide vectors.
struct EncodedComponent {
  Component kind = Component::Headline;
  std::vector<num::Var> vectors;
  std::vector<unsigned char> mask;  // 1 for valid positions
  // Attention weights computed inside the extractor (per sentence, comment
  // or image), kept for inspection.
  std::vector<num::Var> attention;
};

// Word vectors of one sentence or comment.
using WordSequence = std::vector<num::Var>;

// One image: backbone vector of the original and of its ELA rendering. `ela`
// is ignored when the ELA path is disabled.
struct ImageInput {
  num::Var original;
  num::Var ela;
};

std::string extractor_prefix(Component c);

// Declares the parameters of every extractor for the active components.
void declare_extractors(num::ParamStore& store, const ModelConfig& cfg);

// Headline: Bi-LSTM over words, attention pooling, then a Bi-LSTM over the
// single pooled sentence vector.
EncodedComponent hfe(num::Tape& t, const WordSequence& headline);
// Body: Bi-GRU over words per sentence, attention pooling, Bi-GRU over sentences.
EncodedComponent bfe(num::Tape& t, std::span<const WordSequence> sentences);
// Comments: attention pooling straight over word vectors, Bi-GRU over comments.
EncodedComponent cfe(num::Tape& t, std::span<const WordSequence> comments);
// Images: both halves projected to 2h, attention over the (original, ELA)
// pair, Bi-GRU across images. An empty list uses the learned placeholder.
EncodedComponent ife(num::Tape& t, std::span<const ImageInput> images, bool use_ela);

}  // namespace ember::model
