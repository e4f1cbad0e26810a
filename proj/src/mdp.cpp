#include "physq/mdp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace physq {

void ForecastBundle::validate() const {
  if (prices.empty() || prices.size() != t_ambient.size())
    throw std::invalid_argument("ForecastBundle: prices and t_ambient must have equal, non-zero length");
  for (double v : prices)
    if (!std::isfinite(v)) throw std::invalid_argument("ForecastBundle: non-finite price");
  for (double v : t_ambient)
    if (!std::isfinite(v)) throw std::invalid_argument("ForecastBundle: non-finite temperature");
}

AgentObservation make_observation(const std::vector<double>& buffer,
                                  double t_ambient, int timeslot, int depth) {
  if (buffer.empty())
    throw std::invalid_argument("make_observation: empty history buffer");
  const int len = depth + 1;
  AgentObservation obs;
  obs.t_room_history.resize(len);
  const int n = static_cast<int>(buffer.size());
  for (int i = 0; i < len; ++i) {
    // Take the last `len` samples; pad at the front by repeating the earliest.
    const int src = n - len + i;
    obs.t_room_history(i) = buffer[src < 0 ? 0 : src];
  }
  obs.t_ambient = t_ambient;
  obs.timeslot = timeslot;
  return obs;
}

double step_cost(double price_eur_mwh, double u_phys_kw, double dt_hours) {
  if (dt_hours <= 0.0) throw std::invalid_argument("step_cost: dt_hours must be positive");
  if (u_phys_kw < 0.0) throw std::invalid_argument("step_cost: negative u_phys");
  return price_eur_mwh * u_phys_kw * dt_hours / 1000.0;
}

AgentObservation inject_forecast(const AgentObservation& next_obs,
                                 const ForecastBundle& forecasts,
                                 int target_slot) {
  if (target_slot < 0 || target_slot >= forecasts.slots())
    throw std::out_of_range("inject_forecast: target_slot out of range");
  AgentObservation out = next_obs;
  out.t_ambient = forecasts.t_ambient[target_slot];
  out.timeslot = target_slot;
  return out;
}

namespace {
constexpr const char* kBatchTag = "physq-batch";
constexpr int kBatchVersion = 1;

void write_obs(std::ostream& os, const AgentObservation& o) {
  for (int i = 0; i < o.t_room_history.size(); ++i) os << o.t_room_history(i) << ' ';
  os << o.t_ambient << ' ' << o.timeslot;
}

AgentObservation read_obs(std::istringstream& is, int hist_len) {
  AgentObservation o;
  o.t_room_history.resize(hist_len);
  for (int i = 0; i < hist_len; ++i)
    if (!(is >> o.t_room_history(i))) throw std::runtime_error("short history");
  if (!(is >> o.t_ambient >> o.timeslot)) throw std::runtime_error("short observation");
  return o;
}
}  // namespace

void save_batch(const ExperienceBatch& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_batch: cannot write " + path);
  out.precision(17);
  const int hist_len = batch.empty() ? kHistoryDepth + 1
                                     : static_cast<int>(batch.transitions[0].obs.t_room_history.size());
  out << kBatchTag << ' ' << kBatchVersion << " k=" << hist_len - 1
      << " n=" << batch.size() << " seed=" << batch.seed << " days=" << batch.days << '\n';
  for (const Transition& t : batch.transitions) {
    write_obs(out, t.obs);
    out << ' ' << t.action << ' ';
    write_obs(out, t.next_obs);
    out << ' ' << t.u_phys << '\n';
  }
}

ExperienceBatch load_batch(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_batch: cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("load_batch: empty file");
  std::istringstream hs(header);
  std::string tag;
  int version = 0, k = -1;
  std::size_t n = 0;
  ExperienceBatch batch;
  std::string field;
  hs >> tag >> version;
  if (tag != kBatchTag || version != kBatchVersion)
    throw std::runtime_error("load_batch: " + path + ": unsupported format tag '" + tag + " " + std::to_string(version) + "'");
  while (hs >> field) {
    const auto pos = field.find('=');
    if (pos == std::string::npos) throw std::runtime_error("load_batch: malformed header field '" + field + "'");
    const std::string key = field.substr(0, pos);
    const std::string val = field.substr(pos + 1);
    if (key == "k") k = std::stoi(val);
    else if (key == "n") n = std::stoul(val);
    else if (key == "seed") batch.seed = std::stoull(val);
    else if (key == "days") batch.days = std::stoi(val);
  }
  if (k < 0) throw std::runtime_error("load_batch: header missing k");
  const int hist_len = k + 1;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Transition t;
    try {
      t.obs = read_obs(ls, hist_len);
      if (!(ls >> t.action)) throw std::runtime_error("missing action");
      t.next_obs = read_obs(ls, hist_len);
      if (!(ls >> t.u_phys)) throw std::runtime_error("missing u_phys");
    } catch (const std::exception& e) {
      throw std::runtime_error("load_batch: " + path + ": line " + std::to_string(lineno) +
                               ": truncated transition (last good line " + std::to_string(lineno - 1) + ")");
    }
    if (t.action != 0 && t.action != 1)
      throw std::runtime_error("load_batch: " + path + ": line " + std::to_string(lineno) + ": action must be 0 or 1");
    batch.transitions.push_back(std::move(t));
  }
  if (n != batch.size())
    throw std::runtime_error("load_batch: " + path + ": header promises " + std::to_string(n) +
                             " transitions, file has " + std::to_string(batch.size()) +
                             " (last good line " + std::to_string(lineno) + ")");
  return batch;
}

}  // namespace physq
