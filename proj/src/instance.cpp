#include "fastphase/instance.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "fastphase/fft.hpp"
#include "fastphase/rng.hpp"
#include "fastphase/tensor_io.hpp"
#include "json.hpp"

namespace fastphase {

ComplexGrid complex_gaussian(const Shape& shape, Rng& rng) {
  ComplexGrid g(shape);
  for (auto& v : g) v = rng.complex_normal();
  return g;
}

MultiIndex uniform_index(const Shape& shape, Rng& rng) {
  MultiIndex k(shape.rank());
  for (std::size_t a = 0; a < k.size(); ++a) k[a] = rng.uniform_int(0, static_cast<std::int64_t>(shape[a]) - 1);
  return k;
}

ComplexGrid generate_schwarz_object(const SchwarzSpec& spec) {
  if (!(spec.dominance_ratio >= 2.0))
    throw ParameterError("dominance ratio must satisfy rho >= 2, got " + std::to_string(spec.dominance_ratio));
  if (!spec.support.contains(spec.w))
    throw ParameterError("w = (" + to_string(spec.w) + ") outside support " + spec.support.to_string());
  const std::size_t wf = spec.support.flat(spec.w);
  if (spec.support.size() == 1) return ComplexGrid(spec.support, Complex(1.0));

  Rng rng(spec.seed);
  while (true) {
    ComplexGrid x = complex_gaussian(spec.support, rng);
    double l1 = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (i != wf) l1 += std::abs(x[i]);
    if (l1 > 0) {
      x[wf] = spec.dominance_ratio * l1;
      return x;
    }
  }
}

double max_off_anchor_modulus(const ComplexGrid& x, const MultiIndex& w, std::size_t oversample) {
  ComplexGrid rest = x;
  rest.at(w) = 0;
  const Shape m = x.shape().scaled(oversample);
  ComplexGrid X = dft_oversampled(rest, m);
  return max_abs(X) * std::sqrt(static_cast<double>(m.size()));
}

bool check_schwarz(const ComplexGrid& x, const MultiIndex& w, std::size_t oversample) {
  if (!x.shape().contains(w)) throw ParameterError("w outside support");
  return std::abs(x.at(w)) >= 2.0 * max_off_anchor_modulus(x, w, oversample);
}

Shape oversampled_shape(const Shape& n, std::size_t factor) { return n.scaled(factor); }

RealGrid measure(const ComplexGrid& x, const Shape& m) {
  if (!m.dominates(x.shape().scaled(2)))
    throw DimensionError("measurement shape " + m.to_string() + " is undersampled for support " +
                         x.shape().to_string() + " (need m >= 2n)");
  return abs_squared(dft_oversampled(x, m));
}

double noise_variance(double snr_db, double truth_norm_sq) {
  return truth_norm_sq / std::pow(10.0, snr_db / 10.0);
}

RealGrid add_gaussian_noise(const RealGrid& y, double snr_db, double truth_norm_sq, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return y;
  if (!std::isfinite(snr_db)) throw ParameterError("snr_db must be finite or +inf");
  const double sigma = std::sqrt(noise_variance(snr_db, truth_norm_sq));
  const double floor = kPositivityFloor * max_value(y);
  Rng rng(seed);
  RealGrid out(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::max(y[i] + sigma * rng.normal(), floor);
  return out;
}

namespace {

std::int64_t l1_distance(const MultiIndex& a, const MultiIndex& b) {
  std::int64_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::llabs(a[i] - b[i]);
  return d;
}

}  // namespace

DecayMask decay_mask_with_base(const Shape& support, const MultiIndex& w, double r) {
  if (!(r > 0 && r <= 1)) throw ParameterError("decay base must lie in (0, 1]");
  DecayMask mask{r, w, RealGrid(support)};
  for_each_index(support, [&](const MultiIndex& k, std::size_t flat) {
    mask.values[flat] = std::pow(r, static_cast<double>(l1_distance(k, w)));
  });
  return mask;
}

DecayMask build_decay_mask(const RealGrid& magnitudes, const MultiIndex& w, double margin) {
  const Shape& s = magnitudes.shape();
  if (!s.contains(w)) throw ParameterError("anchor outside support");
  if (!(margin >= 2)) throw ParameterError("margin must be >= 2");
  const double anchor = magnitudes.at(w);

  // log of margin * sum_{k != w} r^{|k-w|} m_k, evaluated stably in log r.
  auto feasible = [&](double log_r) {
    double acc = 0;
    for_each_index(s, [&](const MultiIndex& k, std::size_t flat) {
      const auto d = l1_distance(k, w);
      if (d == 0 || magnitudes[flat] == 0) return;
      acc += std::exp(static_cast<double>(d) * log_r) * magnitudes[flat];
    });
    return anchor >= margin * acc;
  };

  if (!(anchor > 0)) throw InfeasibleError("no decay base satisfies the dominance bound: anchor magnitude is zero");
  if (feasible(0.0)) return decay_mask_with_base(s, w, 1.0);
  double lo = std::log(1e-12);
  double hi = 0.0;
  if (!feasible(lo)) throw InfeasibleError("no decay base in (0, 1e-12] satisfies the dominance bound");
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return decay_mask_with_base(s, w, std::exp(lo));
}

namespace {

nlohmann::ordered_json shape_json(const Shape& s) { return nlohmann::ordered_json(s.dims()); }

}  // namespace

void save_instance(const std::string& dir, const Instance& inst) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  write_tensor((fs::path(dir) / "y.fpt").string(), inst.y);
  if (inst.truth) write_tensor((fs::path(dir) / "truth.fpt").string(), *inst.truth);

  nlohmann::ordered_json meta;
  meta["support"] = shape_json(inst.support);
  meta["m"] = shape_json(inst.y.shape());
  meta["seed"] = inst.seed;
  meta["snr_db"] = inst.snr_db ? nlohmann::ordered_json(*inst.snr_db) : nlohmann::ordered_json(nullptr);
  meta["rho"] = inst.rho ? nlohmann::ordered_json(*inst.rho) : nlohmann::ordered_json(nullptr);
  meta["w"] = inst.w ? nlohmann::ordered_json(*inst.w) : nlohmann::ordered_json(nullptr);
  meta["noise_sigma"] =
      inst.noise_sigma ? nlohmann::ordered_json(*inst.noise_sigma) : nlohmann::ordered_json(nullptr);
  std::ofstream f(fs::path(dir) / "meta.json", std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write meta.json in '" + dir + "'");
  f << meta.dump(2) << '\n';
}

Instance load_instance(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("instance directory '" + dir + "' does not exist");
  Instance inst;
  inst.y = read_real_tensor((fs::path(dir) / "y.fpt").string());
  const auto truth_path = fs::path(dir) / "truth.fpt";
  if (fs::exists(truth_path)) inst.truth = read_complex_tensor(truth_path.string());

  const auto meta_path = fs::path(dir) / "meta.json";
  std::ifstream f(meta_path);
  if (!f) throw IoError("missing meta.json in '" + dir + "'");
  nlohmann::json meta;
  try {
    f >> meta;
    inst.support = Shape(meta.at("support").get<std::vector<std::size_t>>());
    auto m = Shape(meta.at("m").get<std::vector<std::size_t>>());
    if (m != inst.y.shape()) throw IoError("meta.json m " + m.to_string() + " disagrees with y.fpt shape " +
                                           inst.y.shape().to_string());
    inst.seed = meta.value("seed", std::uint64_t{0});
    if (meta.contains("snr_db") && !meta["snr_db"].is_null()) inst.snr_db = meta["snr_db"].get<double>();
    if (meta.contains("rho") && !meta["rho"].is_null()) inst.rho = meta["rho"].get<double>();
    if (meta.contains("w") && !meta["w"].is_null()) inst.w = meta["w"].get<MultiIndex>();
    if (meta.contains("noise_sigma") && !meta["noise_sigma"].is_null())
      inst.noise_sigma = meta["noise_sigma"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed meta.json in '" + dir + "': " + e.what());
  } catch (const DimensionError& e) {
    throw IoError("malformed meta.json in '" + dir + "': " + e.what());
  }
  if (inst.truth && inst.truth->shape() != inst.support)
    throw IoError("truth.fpt shape disagrees with meta.json support");
  return inst;
}

}  // namespace fastphase
