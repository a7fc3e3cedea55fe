#pragma once

#include <vector>

#include "pulse/model/config.hpp"
#include "pulse/numerics/layers.hpp"

namespace pulse::model {

struct Attributes {
  std::size_t user = 0, sport = 0, gender = 0;  // ids; >= vocabulary size means unknown
};

struct UserEncoding {
  num::Var states;  // T x state_width
  num::Var z;       // 1 x state_width
};

/// Recurrent user encoder over [x_t ; u ; attribute embeddings] and the
/// position-wise heart-rate predictor.
class UserEncoder {
 public:
  UserEncoder() = default;
  UserEncoder(num::ParameterStore& store, const ModelConfig& config, Rng& rng);

  num::Var attribute_embedding(num::Tape& tape, const num::ParameterStore& store, const Attributes& a) const;
  UserEncoding encode_user(num::Tape& tape, const num::ParameterStore& store, num::Var features, num::Var context,
                           const Attributes& a) const;
  /// dropout -> FFN(GELU) -> one value per row, in normalised units.
  num::Var predict_hr(num::Tape& tape, const num::ParameterStore& store, num::Var states, bool training,
                      Rng* rng) const;

 private:
  ModelConfig cfg_;
  std::size_t user_emb_ = num::kNoParam, sport_emb_ = num::kNoParam, gender_emb_ = num::kNoParam;
  std::vector<num::BiLstmParams> layers_;
  num::FeedForwardParams head_;
};

}  // namespace pulse::model
