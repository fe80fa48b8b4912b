#include <benchmark/benchmark.h>

#include <uwf/data_io.hpp>
#include <uwf/forward_map.hpp>
#include <uwf/linalg.hpp>
#include <uwf/theory.hpp>
#include <uwf/training.hpp>
#include <uwf/wirtinger_flow.hpp>

using namespace uwf;

static void BM_Intensity(benchmark::State& st) {
  const auto N = st.range(0);
  const ForwardMap F = make_gaussian(8 * N, N, 1);
  const CVec x = random_cvec(N, 2);
  for (auto _ : st) benchmark::DoNotOptimize(intensity(F, x));
}
BENCHMARK(BM_Intensity)->Arg(16)->Arg(64)->Arg(256);

static void BM_GradJ(benchmark::State& st) {
  const auto N = st.range(0);
  const ForwardMap F = make_gaussian(8 * N, N, 1);
  const CVec x = random_cvec(N, 2);
  const RVec d = intensity(F, random_cvec(N, 3));
  for (auto _ : st) benchmark::DoNotOptimize(grad_J(F, x, d));
}
BENCHMARK(BM_GradJ)->Arg(16)->Arg(64)->Arg(256);

static void BM_SpectralInit(benchmark::State& st) {
  const auto N = st.range(0);
  const ForwardMap F = make_gaussian(8 * N, N, 1);
  const RVec d = intensity(F, random_cvec(N, 3));
  for (auto _ : st) benchmark::DoNotOptimize(spectral_init(F, d, ScaleRule::sqrt_lambda, 4));
}
BENCHMARK(BM_SpectralInit)->Arg(16)->Arg(64);

static void BM_Rank2Eig(benchmark::State& st) {
  const CVec p = random_cvec(st.range(0), 1), q = random_cvec(st.range(0), 2);
  for (auto _ : st) benchmark::DoNotOptimize(rank2_eig(p, q));
}
BENCHMARK(BM_Rank2Eig)->Arg(16)->Arg(256);

static void BM_RunWf(benchmark::State& st) {
  const ForwardMap F = make_gaussian(128, 16, 1);
  const CVec rho = random_cvec(16, 2);
  const RVec d = intensity(F, rho);
  const CVec init = spectral_init(F, d, ScaleRule::sqrt_lambda, 3).estimate;
  WfConfig cfg;
  cfg.max_iter = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(run_wf(F, d, init, cfg));
}
BENCHMARK(BM_RunWf)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_TrainBackward(benchmark::State& st) {
  const ForwardMap F = make_gaussian(64, 64, 1);
  const auto batch = prepare(F, synthesize(F, gen_squares(20, 8, 8, 2), std::nullopt, 3));
  ModelSpec spec;
  spec.N = 64;
  spec.N_y = 16;
  spec.L = 5;
  spec.encoder_hidden = {64};
  spec.decoder_hidden = {64};
  const UnrolledModel m = make_model(spec);
  TrainConfig cfg;
  if (st.range(0)) cfg.mu_G_targets = cfg.mu_H_targets = {1.0};
  for (auto _ : st) benchmark::DoNotOptimize(train_backward(m, F, batch, cfg));
}
BENCHMARK(BM_TrainBackward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_ContainerRoundTrip(benchmark::State& st) {
  Container c;
  c.put(Tensor::from("a", CMat(make_gaussian(st.range(0), 64, 1).matrix())));
  for (auto _ : st) benchmark::DoNotOptimize(deserialize(serialize(c)));
}
BENCHMARK(BM_ContainerRoundTrip)->Arg(64)->Arg(1024);

static void BM_EstimateDelta(benchmark::State& st) {
  const ForwardMap F = make_gaussian(64, 8, 1);
  std::vector<CVec> s;
  for (std::uint64_t i = 0; i < 50; ++i) s.push_back(random_cvec(8, i));
  for (auto _ : st) benchmark::DoNotOptimize(estimate_delta(F, s));
}
BENCHMARK(BM_EstimateDelta);

BENCHMARK_MAIN();
