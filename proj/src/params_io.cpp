#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "aec/autoencoder.hpp"
#include "aec/error.hpp"

namespace aec {

namespace {

constexpr std::array<char, 4> kMagic{'A', 'E', 'C', 'P'};
constexpr std::uint32_t kBinaryVersion = 1;
constexpr int kJsonVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "binary parameter files are little-endian");

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw IoError("truncated parameter file " + path.string());
  }
  return value;
}

}  // namespace

void save_params_binary(const std::filesystem::path& path, const AEParams& params,
                        const AEConfig& config) {
  params.check_against(config);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put(out, kBinaryVersion);
  put<std::uint64_t>(out, config.hidden_dim);
  put<std::uint64_t>(out, config.input_dim);
  put(out, config.l2_coeff);
  put(out, config.sparsity_coeff);
  put(out, config.sparsity_target);
  put(out, config.kl_epsilon);
  put<std::uint64_t>(out, config.seed);
  const Eigen::VectorXd flat = flatten(params);
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

AEParams load_params_binary(const std::filesystem::path& path, AEConfig* config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError(path.string() + " is not an autoencoder parameter file");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kBinaryVersion) {
    throw IoError("unsupported parameter file version " + std::to_string(version));
  }
  AEConfig cfg;
  cfg.hidden_dim = get<std::uint64_t>(in, path);
  cfg.input_dim = get<std::uint64_t>(in, path);
  cfg.l2_coeff = get<double>(in, path);
  cfg.sparsity_coeff = get<double>(in, path);
  cfg.sparsity_target = get<double>(in, path);
  cfg.kl_epsilon = get<double>(in, path);
  cfg.seed = get<std::uint64_t>(in, path);
  const auto count = cfg.hidden_dim * cfg.input_dim + cfg.hidden_dim + cfg.input_dim;
  Eigen::VectorXd flat(static_cast<Eigen::Index>(count));
  if (!in.read(reinterpret_cast<char*>(flat.data()),
               static_cast<std::streamsize>(count * sizeof(double)))) {
    throw IoError("truncated parameter file " + path.string());
  }
  if (config) *config = cfg;
  return unflatten(flat, cfg.hidden_dim, cfg.input_dim);
}

nlohmann::json to_json(const AEConfig& c) {
  return {{"input_dim", c.input_dim},           {"hidden_dim", c.hidden_dim},
          {"l2_coeff", c.l2_coeff},             {"sparsity_coeff", c.sparsity_coeff},
          {"sparsity_target", c.sparsity_target}, {"kl_epsilon", c.kl_epsilon},
          {"seed", c.seed}};
}

AEConfig ae_config_from_json(const nlohmann::json& j, AEConfig c) {
  c.input_dim = j.value("input_dim", c.input_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.l2_coeff = j.value("l2_coeff", c.l2_coeff);
  c.sparsity_coeff = j.value("sparsity_coeff", c.sparsity_coeff);
  c.sparsity_target = j.value("sparsity_target", c.sparsity_target);
  c.kl_epsilon = j.value("kl_epsilon", c.kl_epsilon);
  c.seed = j.value("seed", c.seed);
  return c;
}

nlohmann::json params_to_json(const AEParams& params, const AEConfig& config) {
  params.check_against(config);
  const Eigen::VectorXd flat = flatten(params);
  const auto w = static_cast<std::size_t>(params.W.size());
  std::vector<double> all(flat.data(), flat.data() + flat.size());
  return {
      {"format", "aec-params"},
      {"version", kJsonVersion},
      {"config", to_json(config)},
      {"W", std::vector<double>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(w))},
      {"b1", std::vector<double>(all.begin() + static_cast<std::ptrdiff_t>(w),
                                 all.begin() + static_cast<std::ptrdiff_t>(w + config.hidden_dim))},
      {"b2", std::vector<double>(all.begin() + static_cast<std::ptrdiff_t>(w + config.hidden_dim),
                                 all.end())},
  };
}

AEParams params_from_json(const nlohmann::json& j, AEConfig* config) {
  if (j.value("format", "") != "aec-params" || j.value("version", 0) != kJsonVersion) {
    throw IoError("not a version-1 aec-params document");
  }
  const AEConfig cfg = ae_config_from_json(j.at("config"));
  const auto w = j.at("W").get<std::vector<double>>();
  const auto b1 = j.at("b1").get<std::vector<double>>();
  const auto b2 = j.at("b2").get<std::vector<double>>();
  if (w.size() != cfg.hidden_dim * cfg.input_dim || b1.size() != cfg.hidden_dim ||
      b2.size() != cfg.input_dim) {
    throw DimensionError("aec-params arrays do not match the declared dimensions");
  }
  Eigen::VectorXd flat(static_cast<Eigen::Index>(w.size() + b1.size() + b2.size()));
  std::copy(w.begin(), w.end(), flat.data());
  std::copy(b1.begin(), b1.end(), flat.data() + w.size());
  std::copy(b2.begin(), b2.end(), flat.data() + w.size() + b1.size());
  if (config) *config = cfg;
  return unflatten(flat, cfg.hidden_dim, cfg.input_dim);
}

}  // namespace aec
