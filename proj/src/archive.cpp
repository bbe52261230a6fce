#include "dpsignal/archive.hpp"

#include "dpsignal/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace dpsignal {

namespace {

constexpr char kMagic[8] = {'D', 'P', 'S', 'D', 'R', 'A', 'W', '1'};

static_assert(std::endian::native == std::endian::little,
              "archive I/O assumes a little-endian host");

template <class T> void put(std::ostream &out, T v) {
  out.write(reinterpret_cast<const char *>(&v), sizeof v);
}

template <class T> T get(std::istream &in) {
  T v{};
  if (!in.read(reinterpret_cast<char *>(&v), sizeof v))
    throw io_error("draws archive is truncated");
  return v;
}

} // namespace

void write_draws(std::ostream &out, const PosteriorDraws &draws) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kArchiveVersion);
  put<std::uint64_t>(out, draws.n_draws());
  put<std::uint64_t>(out, draws.rows);
  put<std::uint64_t>(out, draws.cols);
  out.write(reinterpret_cast<const char *>(draws.lambda.data()),
            static_cast<std::streamsize>(draws.lambda.size() * sizeof(double)));
  if (!out)
    throw io_error("failed writing draws archive");
}

PosteriorDraws read_draws(std::istream &in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw validation_error("not a draws archive (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kArchiveVersion)
    throw validation_error("unsupported draws archive version " + std::to_string(version));
  const auto n = get<std::uint64_t>(in);
  PosteriorDraws d;
  d.rows = get<std::uint64_t>(in);
  d.cols = get<std::uint64_t>(in);
  if (d.rows == 0 || d.cols == 0 || n == 0 || n > (std::uint64_t{1} << 40) / (d.rows * d.cols))
    throw validation_error("draws archive header is implausible");
  d.lambda.resize(n * d.rows * d.cols);
  if (!in.read(reinterpret_cast<char *>(d.lambda.data()),
               static_cast<std::streamsize>(d.lambda.size() * sizeof(double))))
    throw io_error("draws archive is truncated");
  return d;
}

void save_draws(const std::filesystem::path &path, const PosteriorDraws &draws) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw io_error("cannot write draws archive '" + path.string() + "'");
  write_draws(out, draws);
}

PosteriorDraws load_draws(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw io_error("cannot open draws archive '" + path.string() + "'");
  return read_draws(in);
}

} // namespace dpsignal
