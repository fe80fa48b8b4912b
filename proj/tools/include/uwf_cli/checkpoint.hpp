#pragma once

#include <optional>
#include <string>

#include <uwf/data_io.hpp>
#include <uwf/training.hpp>

namespace uwf::cli {

struct Checkpoint {
  UnrolledModel model;
  std::optional<TrainState> state;  // absent for bare models
};

/// Tensors enc.L{j}.W / enc.L{j}.b, dec.L{k}.W / dec.L{k}.b, rnn.gamma; optimizer state under
/// adam.*, warm.*, and the history table. Activations live in the header metadata.
Container checkpoint_container(const UnrolledModel& model, const TrainState* state);
Checkpoint checkpoint_from_container(const Container& c);

void save_checkpoint(const std::string& path, const UnrolledModel& model, const TrainState* state);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace uwf::cli
