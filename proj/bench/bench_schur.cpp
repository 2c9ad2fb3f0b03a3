#include <random>
#include <vector>

#include <benchmark/benchmark.h>
#include <Eigen/Dense>

#include "cpop/schur.hpp"

using namespace cpop;

namespace {

// Moment-matrix-like block: variable (i, j) for i <= j covers entry (i, j) and
// its mirror, plus a Hankel overlay so that variables share entries.
struct Fixture {
  std::vector<BlockCoeffs> blocks;
  std::vector<Eigen::MatrixXd> s_inv, y;
  int num_vars = 0;
};

Eigen::MatrixXd random_spd(int s, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) a(i, j) = nd(rng);
  return a * a.transpose() + s * Eigen::MatrixXd::Identity(s, s);
}

Fixture make_fixture(int size, int nblocks) {
  std::mt19937 rng(7);
  Fixture f;
  for (int k = 0; k < nblocks; ++k) {
    BlockCoeffs b;
    b.size = size;
    for (int i = 0; i < size; ++i)
      for (int j = i; j < size; ++j) {
        std::vector<SymEntry> m{{i, j, 1.0}};
        if (i != j) m.push_back({j, i, 1.0});
        b.vars.push_back(f.num_vars++);
        b.mats.push_back(std::move(m));
      }
    for (int h = 0; h < 2 * size - 1; ++h) {
      std::vector<SymEntry> m;
      for (int i = 0; i < size; ++i)
        if (h - i >= 0 && h - i < size) m.push_back({i, h - i, 0.5});
      b.vars.push_back(f.num_vars++);
      b.mats.push_back(std::move(m));
    }
    f.blocks.push_back(std::move(b));
    f.s_inv.push_back(random_spd(size, rng));
    f.y.push_back(random_spd(size, rng));
  }
  return f;
}

void BM_SchurSerial(benchmark::State& state) {
  Fixture f = make_fixture(static_cast<int>(state.range(0)), 2);
  Eigen::MatrixXd b(f.num_vars, f.num_vars);
  for (auto _ : state) {
    b.setZero();
    schur_serial(f.blocks, f.s_inv, f.y, b);
    benchmark::DoNotOptimize(b.data());
  }
  state.counters["vars"] = f.num_vars;
}

void BM_SchurParallel(benchmark::State& state) {
  Fixture f = make_fixture(static_cast<int>(state.range(0)), 2);
  Eigen::MatrixXd b(f.num_vars, f.num_vars);
  for (auto _ : state) {
    b.setZero();
    schur_parallel(f.blocks, f.s_inv, f.y, b);
    benchmark::DoNotOptimize(b.data());
  }
  state.counters["vars"] = f.num_vars;
}

}  // namespace

BENCHMARK(BM_SchurSerial)->Arg(6)->Arg(10)->Arg(15)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SchurParallel)->Arg(6)->Arg(10)->Arg(15)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
