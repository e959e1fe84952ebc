#include "nidsbench/bench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <map>
#include <ostream>
#include <sstream>

#include "nidsbench/rng.hpp"

namespace nidsbench::bench {

namespace {

// Published per-class row counts of the GTCS release.
constexpr std::pair<ClassId, double> kClassCounts[] = {
    {0, 139186}, {1, 131211}, {2, 93021}, {3, 83857}, {4, 70202}};
constexpr const char* kLabels[] = {"Benign", "DDoS", "Botnet", "Bruteforce", "Infiltration"};

struct PortChoice {
  int port;  // -1: random registered port
  double weight;
};

// Behaviour of one traffic type. Sizes are payload bytes.
struct Profile {
  double p_udp;
  double p_internal_src;
  std::vector<PortChoice> dst_ports;
  double fwd_pkts_log_mu, fwd_pkts_log_sigma;
  double bwd_per_fwd;  // expected bwd packets per fwd packet
  double fwd_size_mean, fwd_size_sd;
  double bwd_size_mean, bwd_size_sd;
  double iat_log_mu, iat_log_sigma;  // seconds
  double iat_jitter;                 // 0 gives strictly periodic gaps
  double p_rst;
  double benign_lookalike;  // share of flows drawn from the benign profile
  std::pair<double, double> window;  // share of the capture span it is active in
};

const std::map<ClassId, Profile>& profiles() {
  static const std::map<ClassId, Profile> p = {
      {0, {0.35, 0.6, {{443, .35}, {80, .2}, {53, .2}, {123, .03}, {22, .02}, {-1, .2}},
           1.5, 1.2, 1.0, 300, 300, 700, 500, std::log(0.5), 1.5, 1.0, 0.05, 0.0, {0.0, 1.0}}},
      {1, {0.5, 0.7, {{80, .7}, {53, .15}, {123, .1}, {-1, .05}},
           1.0, 0.8, 0.2, 60, 40, 40, 30, std::log(0.01), 1.0, 1.0, 0.2, 0.05, {0.1, 0.3}}},
      {2, {0.3, 0.9, {{8080, .5}, {6667, .3}, {443, .2}},
           1.8, 0.6, 0.9, 200, 100, 250, 120, std::log(1.0), 0.2, 0.1, 0.02, 0.15, {0.3, 0.5}}},
      {3, {0.05, 0.5, {{22, .7}, {21, .3}},
           2.5, 0.5, 1.0, 80, 30, 60, 30, std::log(0.05), 0.6, 1.0, 0.1, 0.05, {0.5, 0.7}}},
      {4, {0.3, 0.95, {{445, .2}, {3389, .1}, {-1, .7}},
           0.7, 0.8, 0.6, 100, 150, 150, 200, std::log(0.2), 1.2, 1.0, 0.3, 0.3, {0.7, 0.9}}},
  };
  return p;
}

constexpr double kCaptureStart = 1550188800;  // 2019-02-15 00:00:00 UTC
constexpr double kCaptureSpan = 14 * 86400.0;
constexpr double kFlowTimeout = 120.0;

struct Stats {
  double n = 0, sum = 0, sq = 0, mn = 0, mx = 0;
  void add(double v) {
    mn = n == 0 ? v : std::min(mn, v);
    mx = n == 0 ? v : std::max(mx, v);
    ++n;
    sum += v;
    sq += v * v;
  }
  double mean() const { return n ? sum / n : 0; }
  // Sample standard deviation, as the flow exporter reports it.
  double sd() const { return n > 1 ? std::sqrt(std::max(0.0, (sq - sum * sum / n) / (n - 1))) : 0; }
};

std::string ip_string(std::uint32_t ip) {
  std::ostringstream o;
  o << (ip >> 24) << '.' << ((ip >> 16) & 255) << '.' << ((ip >> 8) & 255) << '.' << (ip & 255);
  return o.str();
}

int pick_port(Rng& rng, const std::vector<PortChoice>& choices) {
  double u = rng.uniform(), acc = 0;
  for (const auto& c : choices) {
    acc += c.weight;
    if (u < acc) return c.port < 0 ? 1024 + static_cast<int>(rng.below(48128)) : c.port;
  }
  return choices.back().port < 0 ? 1024 + static_cast<int>(rng.below(48128)) : choices.back().port;
}

double poisson(Rng& rng, double lambda) {
  if (lambda <= 0) return 0;
  if (lambda > 30) return std::max(0.0, std::round(lambda + std::sqrt(lambda) * rng.normal()));
  const double limit = std::exp(-lambda);
  double k = 0, prod = rng.uniform();
  while (prod > limit) {
    ++k;
    prod *= rng.uniform();
  }
  return k;
}

struct Flow {
  std::map<std::string, double> f;
  std::string src_ip, dst_ip;
  double timestamp = 0;
};

Flow simulate(Rng& rng, const Profile& traffic, double drift) {
  Flow out;
  auto& f = out.f;
  const bool udp = rng.uniform() < traffic.p_udp;
  const bool internal = rng.uniform() < traffic.p_internal_src;
  const std::uint32_t src = internal ? (192u << 24 | 168u << 16 | (rng.below(4) + 1) << 8 | (rng.below(250) + 2))
                                     : static_cast<std::uint32_t>((rng.below(100) + 20) << 24 | rng.below(1 << 24));
  const std::uint32_t dst = internal ? static_cast<std::uint32_t>((rng.below(100) + 20) << 24 | rng.below(1 << 24))
                                     : (192u << 24 | 168u << 16 | 10u << 8 | (rng.below(50) + 2));
  out.src_ip = ip_string(src);
  out.dst_ip = ip_string(dst);
  const int dport = pick_port(rng, traffic.dst_ports);
  const int sport = 49152 + static_cast<int>(rng.below(16384));

  const double n_fwd = std::max(1.0, std::round(std::exp(traffic.fwd_pkts_log_mu + traffic.fwd_pkts_log_sigma *
                                                                                     rng.normal())));
  const double n_bwd = poisson(rng, n_fwd * traffic.bwd_per_fwd);
  const double header = udp ? 8 : 20 + 12 * static_cast<double>(rng.below(2));

  // Packet timeline: first packet is forward, the rest are shuffled.
  std::vector<char> dir(static_cast<std::size_t>(n_fwd + n_bwd), 0);
  std::fill_n(dir.begin(), static_cast<std::size_t>(n_fwd), 1);
  if (dir.size() > 1) rng.shuffle(std::span<char>(dir).subspan(1));

  const double base_gap = std::exp(traffic.iat_log_mu + traffic.iat_log_sigma * rng.normal());
  Stats fwd_len, bwd_len, all_len, flow_iat, fwd_iat, bwd_iat, active, idle;
  double t = 0, last_fwd = -1, last_bwd = -1, seg_start = 0, fwd_payload_pkts = 0;
  double psh_fwd = 0, urg_fwd = 0, syn = 0, fin = 0, rst = 0, psh = 0, ack = 0, urg = 0;
  for (std::size_t i = 0; i < dir.size(); ++i) {
    if (i > 0) {
      const double gap = base_gap * (1 + traffic.iat_jitter * (rng.uniform() * 2 - 1) * 0.999);
      if (t + gap > kFlowTimeout) {
        dir.resize(i);
        break;
      }
      flow_iat.add(gap * 1e6);
      if (gap > 5.0) {
        active.add((t - seg_start) * 1e6);
        idle.add(gap * 1e6);
        seg_start = t + gap;
      }
      t += gap;
    }
    const bool is_fwd = dir[i];
    const double mean = (is_fwd ? traffic.fwd_size_mean : traffic.bwd_size_mean) * drift;
    const double sd = is_fwd ? traffic.fwd_size_sd : traffic.bwd_size_sd;
    double len = std::round(std::clamp(mean + sd * rng.normal(), 0.0, 1460.0));
    if (!udp && rng.uniform() < 0.3) len = 0;  // pure ACKs
    all_len.add(len);
    if (is_fwd) {
      fwd_len.add(len);
      if (last_fwd >= 0) fwd_iat.add((t - last_fwd) * 1e6);
      last_fwd = t;
      if (len > 0) ++fwd_payload_pkts;
    } else {
      bwd_len.add(len);
      if (last_bwd >= 0) bwd_iat.add((t - last_bwd) * 1e6);
      last_bwd = t;
    }
    if (!udp) {
      if (i == 0 || (i == 1 && !is_fwd)) ++syn;
      if (i > 0) ++ack;
      if (len > 0) {
        ++psh;
        if (is_fwd) ++psh_fwd;
      }
    }
  }
  if (!udp) {
    if (rng.uniform() < traffic.p_rst) {
      ++rst;
    } else if (dir.size() > 3) {
      fin += 1 + static_cast<double>(rng.below(2));
    }
    if (rng.uniform() < 0.001) {
      ++urg;
      ++urg_fwd;
    }
  }
  if (active.n > 0 || idle.n > 0) active.add((t - seg_start) * 1e6);

  const double duration_us = std::round(t * 1e6);
  const double secs = duration_us * 1e-6;
  auto per_sec = [&](double v) { return secs > 0 ? v / secs : 0.0; };
  const double tot_fwd = fwd_len.n, tot_bwd = bwd_len.n;
  const double payload = fwd_len.sum + bwd_len.sum;

  f["Src Port"] = sport;
  f["Dst Port"] = dport;
  f["Protocol"] = udp ? 17 : 6;
  f["Flow Duration"] = duration_us;
  f["Tot Fwd Pkts"] = tot_fwd;
  f["Tot Bwd Pkts"] = tot_bwd;
  f["TotLen Fwd Pkts"] = fwd_len.sum;
  f["TotLen Bwd Pkts"] = bwd_len.sum;
  f["Fwd Pkt Len Max"] = fwd_len.mx;
  f["Fwd Pkt Len Min"] = fwd_len.mn;
  f["Fwd Pkt Len Mean"] = fwd_len.mean();
  f["Fwd Pkt Len Std"] = fwd_len.sd();
  f["Bwd Pkt Len Max"] = bwd_len.mx;
  f["Bwd Pkt Len Min"] = bwd_len.mn;
  f["Bwd Pkt Len Mean"] = bwd_len.mean();
  f["Bwd Pkt Len Std"] = bwd_len.sd();
  f["Flow Byts/s"] = per_sec(payload);
  f["Flow Pkts/s"] = per_sec(tot_fwd + tot_bwd);
  f["Flow IAT Mean"] = flow_iat.mean();
  f["Flow IAT Std"] = flow_iat.sd();
  f["Flow IAT Max"] = flow_iat.mx;
  f["Flow IAT Min"] = flow_iat.mn;
  f["Fwd IAT Tot"] = fwd_iat.sum;
  f["Fwd IAT Mean"] = fwd_iat.mean();
  f["Fwd IAT Std"] = fwd_iat.sd();
  f["Fwd IAT Max"] = fwd_iat.mx;
  f["Fwd IAT Min"] = fwd_iat.mn;
  f["Bwd IAT Tot"] = bwd_iat.sum;
  f["Bwd IAT Mean"] = bwd_iat.mean();
  f["Bwd IAT Std"] = bwd_iat.sd();
  f["Bwd IAT Max"] = bwd_iat.mx;
  f["Bwd IAT Min"] = bwd_iat.mn;
  f["Fwd PSH Flags"] = psh_fwd > 0 ? 1 : 0;
  f["Fwd URG Flags"] = urg_fwd > 0 ? 1 : 0;
  f["Fwd Header Len"] = header * tot_fwd;
  f["Bwd Header Len"] = header * tot_bwd;
  f["Fwd Pkts/s"] = per_sec(tot_fwd);
  f["Bwd Pkts/s"] = per_sec(tot_bwd);
  f["Pkt Len Min"] = all_len.mn;
  f["Pkt Len Max"] = all_len.mx;
  f["Pkt Len Mean"] = payload / (tot_fwd + tot_bwd);
  f["Pkt Len Std"] = all_len.sd();
  f["Pkt Len Var"] = all_len.sd() * all_len.sd();
  f["FIN Flag Cnt"] = fin;
  f["SYN Flag Cnt"] = syn;
  f["RST Flag Cnt"] = rst;
  f["PSH Flag Cnt"] = psh;
  f["ACK Flag Cnt"] = ack;
  f["URG Flag Cnt"] = urg;
  f["Down/Up Ratio"] = std::floor(tot_bwd / tot_fwd);
  f["Pkt Size Avg"] = payload / (tot_fwd + tot_bwd);
  f["Fwd Seg Size Avg"] = fwd_len.sum / tot_fwd;
  f["Bwd Seg Size Avg"] = bwd_len.mean();
  f["Subflow Fwd Pkts"] = tot_fwd;
  f["Subflow Fwd Byts"] = fwd_len.sum;
  f["Subflow Bwd Pkts"] = tot_bwd;
  f["Subflow Bwd Byts"] = bwd_len.sum;
  f["Init Fwd Win Byts"] = udp ? -1 : static_cast<double>(std::vector<int>{8192, 29200, 64240, 65535}[rng.below(4)]);
  f["Init Bwd Win Byts"] = udp || tot_bwd == 0 ? -1 : static_cast<double>(std::vector<int>{0, 28960, 65160}[rng.below(3)]);
  f["Fwd Act Data Pkts"] = fwd_payload_pkts;
  f["Fwd Seg Size Min"] = header;
  f["Active Mean"] = active.mean();
  f["Active Std"] = active.sd();
  f["Active Max"] = active.mx;
  f["Active Min"] = active.mn;
  f["Idle Mean"] = idle.mean();
  f["Idle Std"] = idle.sd();
  f["Idle Max"] = idle.mx;
  f["Idle Min"] = idle.mn;
  return out;
}

std::string format_time(double epoch) {
  const std::time_t t = static_cast<std::time_t>(epoch);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%d/%m/%Y %H:%M:%S", &tm);
  return buf;
}

}  // namespace

void write_gtcs_surrogate(const DatasetSpec& spec, std::ostream& out, const SurrogateOptions& options) {
  if (options.rows < 50) throw Error("surrogate needs at least 50 rows");
  Rng rng(options.seed);
  double total = 0;
  for (const auto& [c, n] : kClassCounts) total += n;

  struct Row {
    double ts;
    ClassId c;
    Flow flow;
  };
  std::vector<Row> rows;
  rows.reserve(options.rows);
  for (const auto& [c, n] : kClassCounts) {
    const auto count = static_cast<std::size_t>(std::llround(n / total * static_cast<double>(options.rows)));
    const Profile& own = profiles().at(c);
    for (std::size_t i = 0; i < count; ++i) {
      const double u = own.window.first + (own.window.second - own.window.first) * rng.uniform();
      // Benign behaviour shifts slowly over the capture.
      const double drift = 1.0 + 0.3 * u;
      const Profile& behaviour = rng.uniform() < own.benign_lookalike ? profiles().at(kBenign) : own;
      Flow flow = simulate(rng, behaviour, drift);
      rows.push_back({kCaptureStart + u * kCaptureSpan, c, std::move(flow)});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.ts < b.ts; });

  std::vector<std::string> columns{"Flow ID", "Src IP", "Dst IP", "Timestamp"};
  for (const auto& name : spec.complete) columns.push_back(name);
  columns.push_back(spec.label_column);
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  out.precision(10);
  for (const auto& r : rows) {
    const auto& f = r.flow.f;
    out << r.flow.src_ip << '-' << r.flow.dst_ip << '-' << f.at("Src Port") << '-' << f.at("Dst Port") << '-'
        << f.at("Protocol") << ',' << r.flow.src_ip << ',' << r.flow.dst_ip << ',' << format_time(r.ts);
    for (const auto& name : spec.complete) {
      const auto it = f.find(name);
      out << ',' << (it == f.end() ? 0.0 : it->second);
    }
    out << ',' << kLabels[r.c] << '\n';
  }
}

}  // namespace nidsbench::bench
