#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>
#include <string>

#include "fieldlink/store/document_store.hpp"

using namespace fieldlink::store;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  std::random_device rd;
  auto dir = fs::temp_directory_path() / ("fieldlink-bench-" + std::to_string(rd()));
  fs::create_directories(dir);
  return dir;
}

void BM_PutCas(benchmark::State& state) {
  const auto dir = scratch_dir();
  {
    DocumentStore docs(dir);
    std::uint64_t version = 0;
    for (auto _ : state) version = docs.put_cas("bench", "doc", version, {{"n", version}});
  }
  fs::remove_all(dir);
}
BENCHMARK(BM_PutCas);

void BM_UpdateWithRetry(benchmark::State& state) {
  const auto dir = scratch_dir();
  {
    DocumentStore docs(dir);
    for (auto _ : state) {
      update_with_retry(docs, "bench", "counter", [](const Json& cur) {
        return Json{{"n", cur.is_null() ? 1 : cur.at("n").get<int>() + 1}};
      });
    }
  }
  fs::remove_all(dir);
}
BENCHMARK(BM_UpdateWithRetry);

void BM_ListPage(benchmark::State& state) {
  const auto dir = scratch_dir();
  {
    DocumentStore docs(dir);
    for (int i = 0; i < state.range(0); ++i) docs.put_cas("bench", "doc" + std::to_string(i), 0, {{"i", i}});
    for (auto _ : state) benchmark::DoNotOptimize(docs.list("bench"));
  }
  fs::remove_all(dir);
}
BENCHMARK(BM_ListPage)->Arg(100)->Arg(10000);

}  // namespace
