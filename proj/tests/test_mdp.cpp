#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "physq/mdp.hpp"

using namespace physq;

TEST_SUITE_BEGIN("mdp");

namespace {
bool same_vec(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() == 0.0;
}
}  // namespace

TEST_CASE("make_observation pads short buffers by repeating the earliest sample") {
  const AgentObservation obs = make_observation({20.5}, 3.0, 7);
  REQUIRE(obs.t_room_history.size() == kHistoryDepth + 1);
  for (int i = 0; i <= kHistoryDepth; ++i) CHECK(obs.t_room_history(i) == 20.5);
  CHECK(obs.t_ambient == 3.0);
  CHECK(obs.timeslot == 7);
  CHECK(obs.t_room_current() == 20.5);
}

TEST_CASE("make_observation takes the most recent k+1 samples, oldest first") {
  const AgentObservation obs =
      make_observation({1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0}, 0.0, 0);
  REQUIRE(obs.t_room_history.size() == 5);
  CHECK(obs.t_room_history(0) == 3.0);
  CHECK(obs.t_room_history(4) == 7.0);
  CHECK(obs.t_room_current() == 7.0);
}

TEST_CASE("make_observation rejects an empty buffer") {
  CHECK_THROWS_AS(make_observation({}, 0.0, 0), std::invalid_argument);
}

TEST_CASE("step cost in EUR from EUR/MWh, kW and hours") {
  CHECK(step_cost(100.0, 10.0, 1.0) == doctest::Approx(1.0));
  CHECK(step_cost(120.0, 5.0, 1.0) == doctest::Approx(0.6));
  CHECK(step_cost(100.0, 10.0, 0.25) == doctest::Approx(0.25));
  CHECK(step_cost(50.0, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(step_cost(100.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(step_cost(100.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("inject_forecast replaces only ambient and timeslot") {
  AgentObservation obs = make_observation({19.0, 20.0}, 2.0, 3);
  ForecastBundle f;
  f.prices.assign(48, 30.0);
  f.t_ambient.assign(48, 0.0);
  f.t_ambient[40] = -7.5;
  const AgentObservation out = inject_forecast(obs, f, 40);
  CHECK(out.t_ambient == -7.5);
  CHECK(out.timeslot == 40);
  CHECK(same_vec(out.t_room_history, obs.t_room_history));
  CHECK_THROWS_AS(inject_forecast(obs, f, 48), std::out_of_range);
  CHECK_THROWS_AS(inject_forecast(obs, f, -1), std::out_of_range);
}

TEST_CASE("forecast validation") {
  ForecastBundle f;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f.prices.assign(48, 30.0);
  f.t_ambient.assign(47, 0.0);
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f.t_ambient.assign(48, 0.0);
  CHECK_NOTHROW(f.validate());
  f.prices[3] = std::nan("");
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

namespace {

ExperienceBatch synthetic_batch(int n) {
  ExperienceBatch b;
  b.seed = 99;
  b.days = n / 24;
  for (int i = 0; i < n; ++i) {
    Transition t;
    t.obs = make_observation({19.0 + 0.001 * i, 20.0 - 0.002 * i}, 1.0 + i, i % 24);
    t.action = i % 2;
    t.next_obs = make_observation({20.0 - 0.002 * i, 19.5}, 2.0 + i, (i % 24) + 1);
    t.u_phys = (i % 2) * 10.0 * (i % 7) / 7.0;
    b.transitions.push_back(t);
  }
  return b;
}

}  // namespace

TEST_CASE("batch save/load round trip preserves every field exactly") {
  const ExperienceBatch b = synthetic_batch(720);
  const std::string path = "/tmp/physq_test_batch.txt";
  save_batch(b, path);
  const ExperienceBatch r = load_batch(path);
  REQUIRE(r.size() == b.size());
  CHECK(r.seed == b.seed);
  CHECK(r.days == b.days);
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(same_vec(r.transitions[i].obs.t_room_history,
                   b.transitions[i].obs.t_room_history));
    CHECK(r.transitions[i].obs.t_ambient == b.transitions[i].obs.t_ambient);
    CHECK(r.transitions[i].obs.timeslot == b.transitions[i].obs.timeslot);
    CHECK(r.transitions[i].action == b.transitions[i].action);
    CHECK(r.transitions[i].u_phys == b.transitions[i].u_phys);
    CHECK(same_vec(r.transitions[i].next_obs.t_room_history,
                   b.transitions[i].next_obs.t_room_history));
  }
  std::remove(path.c_str());
}

TEST_CASE("empty batch round trips") {
  const std::string path = "/tmp/physq_test_empty_batch.txt";
  save_batch(ExperienceBatch{}, path);
  const ExperienceBatch r = load_batch(path);
  CHECK(r.empty());
  std::remove(path.c_str());
}

TEST_CASE("truncated batch file is rejected with the last good line") {
  const ExperienceBatch b = synthetic_batch(4);
  const std::string path = "/tmp/physq_test_trunc_batch.txt";
  save_batch(b, path);
  // Chop the final line in half.
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  std::ofstream out(path);
  out << all.substr(0, all.size() - 30);
  out.close();
  CHECK_THROWS_WITH_AS(load_batch(path), doctest::Contains("last good line"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("batch header count mismatch is rejected") {
  const ExperienceBatch b = synthetic_batch(3);
  const std::string path = "/tmp/physq_test_count_batch.txt";
  save_batch(b, path);
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  // Drop the last full line but keep the header's n=3.
  const auto cut = all.rfind('\n', all.size() - 2);
  std::ofstream out(path);
  out << all.substr(0, cut + 1);
  out.close();
  CHECK_THROWS_WITH_AS(load_batch(path), doctest::Contains("promises"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("unknown batch format tag is rejected") {
  const std::string path = "/tmp/physq_test_tag_batch.txt";
  std::ofstream out(path);
  out << "other-format 9 k=4 n=0 seed=0 days=0\n";
  out.close();
  CHECK_THROWS_WITH_AS(load_batch(path), doctest::Contains("unsupported format"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_SUITE_END();
