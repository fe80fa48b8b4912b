#include "uwf_cli/checkpoint.hpp"

#include <uwf/errors.hpp>

namespace uwf::cli {

namespace {

using nlohmann::json;

constexpr int kHistoryCols = 11;

void put_net(Container& c, const Net& net, const std::string& prefix, json& acts) {
  acts = json::array();
  for (std::size_t j = 0; j < net.layers.size(); ++j) {
    const Layer& L = net.layers[j];
    const std::string p = prefix + ".L" + std::to_string(j);
    c.put(Tensor::from(p + ".W", L.W));
    c.put(Tensor::from(p + ".b", L.b));
    acts.push_back({{"kind", to_string(L.act)}, {"slope", L.act.slope}});
  }
}

Net get_net(const Container& c, const std::string& prefix, const json& acts) {
  Net net;
  for (std::size_t j = 0; j < acts.size(); ++j) {
    const std::string p = prefix + ".L" + std::to_string(j);
    Layer L;
    L.W = c.at(p + ".W").to_rmat();
    L.b = c.at(p + ".b").to_rvec();
    L.act = activation_from_string(acts[j].at("kind").get<std::string>(),
                                   acts[j].at("slope").get<double>());
    net.layers.push_back(std::move(L));
  }
  return net;
}

RVec to_rvec(const std::vector<double>& v) {
  return Eigen::Map<const RVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Container checkpoint_container(const UnrolledModel& model, const TrainState* state) {
  model.validate();
  Container c;
  json enc_acts, dec_acts;
  put_net(c, model.encoder, "enc", enc_acts);
  put_net(c, model.decoder, "dec", dec_acts);
  c.put(Tensor::from("rnn.gamma", to_rvec(model.gammas)));
  c.meta = {{"kind", "uwf-model"},
            {"N", model.N()},
            {"N_y", model.N_y()},
            {"L", model.L()},
            {"encoder_activations", enc_acts},
            {"decoder_activations", dec_acts},
            {"has_state", state != nullptr}};
  if (!state) return c;

  c.meta["epochs_done"] = state->epochs_done;
  c.meta["adam_step"] = state->adam.step;
  if (state->adam.m.size() > 0) {
    c.put(Tensor::from("adam.m", state->adam.m));
    c.put(Tensor::from("adam.v", state->adam.v));
  }
  for (std::size_t j = 0; j < state->warm.enc.size(); ++j)
    c.put(Tensor::from("warm.enc." + std::to_string(j), state->warm.enc[j]));
  for (std::size_t k = 0; k < state->warm.dec.size(); ++k)
    c.put(Tensor::from("warm.dec." + std::to_string(k), state->warm.dec[k]));
  c.meta["warm_enc"] = state->warm.enc.size();
  c.meta["warm_dec"] = state->warm.dec.size();

  RMat h(static_cast<Eigen::Index>(state->history.size()), kHistoryCols);
  for (std::size_t i = 0; i < state->history.size(); ++i) {
    const HistoryRow& r = state->history[i];
    const auto row = static_cast<Eigen::Index>(i);
    h.row(row) << r.epoch, r.train_mse, r.val_mse, r.loss.data, r.loss.intermediate, r.loss.c1,
        r.loss.c2, r.loss.c3, r.loss.c4, r.loss.pixel, r.loss.total;
  }
  c.put(Tensor::from("history", h));
  return c;
}

Checkpoint checkpoint_from_container(const Container& c) {
  if (c.meta.value("kind", std::string()) != "uwf-model")
    throw IoError("container does not hold a model checkpoint");
  Checkpoint ck;
  try {
    ck.model.encoder = get_net(c, "enc", c.meta.at("encoder_activations"));
    ck.model.decoder = get_net(c, "dec", c.meta.at("decoder_activations"));
    const RVec g = c.at("rnn.gamma").to_rvec();
    ck.model.gammas.assign(g.data(), g.data() + g.size());
    ck.model.validate();

    if (c.meta.value("has_state", false)) {
      TrainState st;
      st.epochs_done = c.meta.at("epochs_done").get<int>();
      st.adam.step = c.meta.at("adam_step").get<std::int64_t>();
      if (c.find("adam.m")) {
        st.adam.m = c.at("adam.m").to_rvec();
        st.adam.v = c.at("adam.v").to_rvec();
      }
      const auto ne = c.meta.at("warm_enc").get<std::size_t>();
      const auto nd = c.meta.at("warm_dec").get<std::size_t>();
      for (std::size_t j = 0; j < ne; ++j)
        st.warm.enc.push_back(c.at("warm.enc." + std::to_string(j)).to_rvec());
      for (std::size_t k = 0; k < nd; ++k)
        st.warm.dec.push_back(c.at("warm.dec." + std::to_string(k)).to_rvec());
      const RMat h = c.at("history").to_rmat();
      if (h.rows() > 0 && h.cols() != kHistoryCols) throw IoError("history table has wrong width");
      for (Eigen::Index i = 0; i < h.rows(); ++i) {
        HistoryRow r;
        r.epoch = static_cast<int>(h(i, 0));
        r.train_mse = h(i, 1);
        r.val_mse = h(i, 2);
        r.loss.data = h(i, 3);
        r.loss.intermediate = h(i, 4);
        r.loss.c1 = h(i, 5);
        r.loss.c2 = h(i, 6);
        r.loss.c3 = h(i, 7);
        r.loss.c4 = h(i, 8);
        r.loss.pixel = h(i, 9);
        r.loss.total = h(i, 10);
        st.history.push_back(r);
      }
      ck.state = std::move(st);
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw IoError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("malformed checkpoint: ") + e.what());
  }
  return ck;
}

void save_checkpoint(const std::string& path, const UnrolledModel& model, const TrainState* state) {
  store(path, checkpoint_container(model, state));
}

Checkpoint load_checkpoint(const std::string& path) {
  return checkpoint_from_container(load(path));
}

}  // namespace uwf::cli
