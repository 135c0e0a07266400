#include "microlearn/codec.hpp"
#include "microlearn/event_log.hpp"
#include "microlearn/random.hpp"
#include "microlearn/recommender.hpp"
#include "microlearn/statistics.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <unistd.h>

using namespace microlearn;

namespace {

std::filesystem::path fixture(const char* rel) { return std::filesystem::path(MICROLEARN_FIXTURE_DIR) / rel; }

/// A layered mind map: `width` concepts per layer, each requiring two from the layer below.
std::string layered_map(int layers, int width) {
  std::string text;
  for (int l = 0; l < layers; ++l) {
    for (int w = 0; w < width; ++w) {
      const auto id = "c" + std::to_string(l) + "-" + std::to_string(w);
      text += "concept " + id + " \"" + id + "\"\n";
      if (l > 0) {
        text += "requires " + id + " <- c" + std::to_string(l - 1) + "-" + std::to_string(w) + "\n";
        text += "requires " + id + " <- c" + std::to_string(l - 1) + "-" + std::to_string((w + 1) % width) + "\n";
      }
      text += "unit u" + id + " \"Unit\" covers " + id + " kind=video minutes=5 uri=\"x\"\n";
    }
  }
  return text;
}

void BM_ParseAndValidate(benchmark::State& state) {
  const auto text = layered_map(static_cast<int>(state.range(0)), 20);
  for (auto _ : state) benchmark::DoNotOptimize(parse_mindmap(text));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 20);
}
BENCHMARK(BM_ParseAndValidate)->Arg(5)->Arg(50)->Arg(250);

void BM_RecommendWithClosure(benchmark::State& state) {
  const auto graph = parse_mindmap(layered_map(static_cast<int>(state.range(0)), 20));
  GradeReport report;
  for (int w = 0; w < 20; ++w) {
    report.wrong_answers.push_back({"q" + std::to_string(w), "c" + std::to_string(state.range(0) - 1) + "-" + std::to_string(w)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(recommend(report, graph, RecommendationOrigin::initial_fail, ClosureDepth::with_prerequisites));
  }
}
BENCHMARK(BM_RecommendWithClosure)->Arg(5)->Arg(50);

void BM_Grade(benchmark::State& state) {
  const auto quiz = quiz_from_json(read_json_file(fixture("quizzes/initial.json")));
  const auto sub = submission_from_json(read_json_file(fixture("submissions/failing.json")));
  for (auto _ : state) benchmark::DoNotOptimize(grade(quiz, sub));
}
BENCHMARK(BM_Grade);

EventRecord sample_record(std::int64_t i) {
  EventRecord r;
  r.learner = "0123456789abcdef0123456789abcdef";
  r.kind = "progress";
  r.payload["event"] = "UnitCompleted";
  r.payload["unit_id"] = "u-" + std::to_string(i % 40);
  return r;
}

void BM_LogAppend(benchmark::State& state) {
  const auto path = std::filesystem::temp_directory_path() / ("microlearn-bench-" + std::to_string(::getpid()));
  std::filesystem::remove(path);
  const auto durability = state.range(0) ? Durability::fsync : Durability::buffered;
  {
    EventLog log(path, durability);
    std::int64_t i = 0;
    for (auto _ : state) log.append(sample_record(i++));
  }
  std::filesystem::remove(path);
  state.SetLabel(state.range(0) ? "fsync" : "buffered");
}
BENCHMARK(BM_LogAppend)->Arg(0)->Arg(1);

void BM_EncodeDecode(benchmark::State& state) {
  const auto line = encode_record(sample_record(7));
  for (auto _ : state) benchmark::DoNotOptimize(encode_record(decode_record(line)));
}
BENCHMARK(BM_EncodeDecode);

void BM_CohortCompare(benchmark::State& state) {
  Rng rng(1);
  std::vector<Rational> a, b;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    a.emplace_back(static_cast<std::int64_t>(rng.uniform_index(21)), 20);
    b.emplace_back(static_cast<std::int64_t>(rng.uniform_index(21)), 20);
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::cohort_compare(a, b));
}
BENCHMARK(BM_CohortCompare)->Arg(8)->Arg(200)->Arg(5000);

void BM_ExactP(benchmark::State& state) {
  Rng rng(2);
  std::vector<Rational> a, b;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    a.emplace_back(static_cast<std::int64_t>(rng.uniform_index(5)));
    b.emplace_back(static_cast<std::int64_t>(rng.uniform_index(5)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::exact_two_sided_p(a, b));
}
BENCHMARK(BM_ExactP)->Arg(8)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
