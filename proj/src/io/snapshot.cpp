#include "io/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace fsr::io {

namespace {

constexpr char kMagic[8] = {'F', 'S', 'R', 'S', 'N', 'A', 'P', '1'};

[[noreturn]] void bad(const std::string& what) { throw Error("snapshot: " + what); }

// The layout is defined as little-endian; every supported target is.
static_assert(std::endian::native == std::endian::little,
              "snapshot layout assumes a little-endian target");

class Writer {
 public:
  explicit Writer(const std::string& path)
      : out_(path, std::ios::binary), path_(path) {
    if (!out_) bad("cannot write \"" + path + "\"");
  }

  void bytes(const void* data, std::size_t size) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void doubles(const double* data, std::size_t count) { bytes(data, 8 * count); }

  void finish() {
    if (!out_) bad("write failure on \"" + path_ + "\"");
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path)
      : in_(path, std::ios::binary), path_(path) {
    if (!in_) bad("cannot open \"" + path + "\"");
  }

  void bytes(void* data, std::size_t size) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (in_.gcount() != static_cast<std::streamsize>(size))
      bad("truncated file \"" + path_ + "\"");
  }
  std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  void doubles(double* data, std::size_t count) { bytes(data, 8 * count); }

  void expect_eof() {
    char extra;
    in_.read(&extra, 1);
    if (!in_.eof()) bad("trailing bytes in \"" + path_ + "\"");
  }

 private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace

void save_snapshot(const std::string& path, const InferenceEngined& engine,
                   const OnlineMoments<double>* standardizer) {
  const GmState<double>& gm = engine.gm();
  gm.current.require_shape();
  const auto d = static_cast<std::uint64_t>(gm.current.values.rows());
  const auto m = static_cast<std::uint64_t>(gm.current.grid.size());
  const auto chains = static_cast<std::uint64_t>(engine.chain_count());

  Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.u64(d);
  w.u64(m);
  w.u64(chains);
  w.u64(static_cast<std::uint64_t>(engine.burn_in()));
  w.u64(gm.n);
  w.u64(engine.master_seed());
  w.f64(gm.schedule.gamma);
  w.f64(gm.schedule.alpha);
  w.f64(gm.schedule.max_step);
  w.doubles(gm.current.grid.points().data(), m);
  w.doubles(gm.current.values.data(), d * m);
  w.doubles(gm.average.values.data(), d * m);
  w.u8(standardizer ? 1 : 0);
  if (standardizer) {
    if (static_cast<std::uint64_t>(standardizer->mean().size()) != d)
      bad("standardizer dimension does not match the estimator");
    w.u64(standardizer->count());
    w.doubles(standardizer->mean().data(), d);
    w.doubles(standardizer->sum_squares().data(), d);
  }
  // Chains are stored packed by column block; write them chain by chain so
  // the layout reads back independent of the in-memory packing.
  for (std::uint64_t b = 0; b < chains; ++b) {
    const BootstrapChain<double> view = engine.chain(static_cast<Eigen::Index>(b));
    w.doubles(view.iterate.data(), d * m);
    w.doubles(view.average.data(), d * m);
    for (std::uint64_t word : view.rng.state()) w.u64(word);
    w.u8(view.rng.spare_valid() ? 1 : 0);
    w.f64(view.rng.spare());
  }
  w.finish();
}

Snapshot load_snapshot(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0)
    bad("\"" + path + "\" is not a state snapshot (bad magic)");

  const std::uint64_t d = r.u64();
  const std::uint64_t m = r.u64();
  const std::uint64_t chains = r.u64();
  const std::uint64_t burn_in = r.u64();
  const std::uint64_t n = r.u64();
  const std::uint64_t master_seed = r.u64();
  if (d == 0 || d > (1 << 20) || m < 2 || m > (1 << 20) || chains > (1 << 24))
    bad("implausible dimensions in \"" + path + "\"");

  StepSchedule<double> schedule;
  schedule.gamma = r.f64();
  schedule.alpha = r.f64();
  schedule.max_step = r.f64();
  schedule.validate();

  Vector<double> points(static_cast<Eigen::Index>(m));
  r.doubles(points.data(), m);
  Gridd grid(std::move(points));

  Snapshot snap{InferenceEngined(static_cast<Eigen::Index>(d), grid,
                                 static_cast<Eigen::Index>(chains), master_seed,
                                 schedule, static_cast<Eigen::Index>(burn_in)),
                std::nullopt};
  GmState<double>& gm = snap.engine.gm();
  r.doubles(gm.current.values.data(), d * m);
  r.doubles(gm.average.values.data(), d * m);
  gm.n = n;
  gm.current.require_shape();
  gm.average.require_shape();

  if (r.u8() != 0) {
    const std::uint64_t count = r.u64();
    Vector<double> mean(static_cast<Eigen::Index>(d));
    Vector<double> m2(static_cast<Eigen::Index>(d));
    r.doubles(mean.data(), d);
    r.doubles(m2.data(), d);
    snap.standardizer.emplace(static_cast<Eigen::Index>(d));
    snap.standardizer->restore(count, std::move(mean), std::move(m2));
  }

  Matrixd iterates(static_cast<Eigen::Index>(d),
                   static_cast<Eigen::Index>(chains * m));
  Matrixd averages(static_cast<Eigen::Index>(d),
                   static_cast<Eigen::Index>(chains * m));
  std::vector<Rng> rngs;
  rngs.reserve(chains);
  Matrixd block(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
  for (std::uint64_t b = 0; b < chains; ++b) {
    r.doubles(block.data(), d * m);
    iterates.middleCols(static_cast<Eigen::Index>(b * m),
                        static_cast<Eigen::Index>(m)) = block;
    r.doubles(block.data(), d * m);
    averages.middleCols(static_cast<Eigen::Index>(b * m),
                        static_cast<Eigen::Index>(m)) = block;
    std::array<std::uint64_t, 4> state;
    for (std::uint64_t& word : state) word = r.u64();
    const bool spare_valid = r.u8() != 0;
    const double spare = r.f64();
    Rng rng;
    rng.restore(state, spare_valid, spare);
    rngs.push_back(rng);
  }
  snap.engine.restore_chains(std::move(iterates), std::move(averages),
                             std::move(rngs));
  r.expect_eof();
  return snap;
}

}  // namespace fsr::io
