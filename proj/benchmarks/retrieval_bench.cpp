#include <benchmark/benchmark.h>

#include <random>

#include "tellerflow/faq_agent.h"

using namespace tellerflow;

namespace {

const char* kVocab[] = {"transfer", "limit", "card", "loan", "savings", "rate", "pin", "fee",
                        "duitnow", "abroad", "branch", "cheque", "deposit", "bill", "atm", "online"};

std::shared_ptr<const StoreSnapshot> make_store(VectorStore& store, int n) {
  std::mt19937_64 rng(1);
  std::vector<KnowledgeDoc> docs;
  for (int i = 0; i < n; ++i) {
    std::string body;
    for (int w = 0; w < 10; ++w) body += std::string(kVocab[rng() % 16]) + " ";
    docs.push_back({"kb-" + std::to_string(i), "", body, {}});
  }
  return store.ingest(docs);
}

void BM_Embed(benchmark::State& state) {
  HashedNgramEmbedder e;
  for (auto _ : state) benchmark::DoNotOptimize(e.embed("What is the daily limit for DuitNow transfers abroad?"));
}
BENCHMARK(BM_Embed);

void BM_Retrieve(benchmark::State& state) {
  VectorStore store(std::make_shared<HashedNgramEmbedder>());
  auto snap = make_store(store, static_cast<int>(state.range(0)));
  auto q = store.embedder().embed("transfer limit fee");
  for (auto _ : state) benchmark::DoNotOptimize(retrieve(q, *snap, 8));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Retrieve)->RangeMultiplier(10)->Range(100, 10000)->Complexity();

void BM_Rerank(benchmark::State& state) {
  VectorStore store(std::make_shared<HashedNgramEmbedder>());
  auto snap = make_store(store, 1000);
  auto q = store.embedder().embed("transfer limit fee");
  auto hits = retrieve(q, *snap, 8);
  for (auto _ : state) benchmark::DoNotOptimize(rerank("transfer limit fee", hits, *snap));
}
BENCHMARK(BM_Rerank);

}  // namespace
