#include "mmlab/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace mmlab {

namespace {

template <class T>
void put(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw ContainerError("chain container: truncated input");
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_chain(const SampleChain& chain, std::ostream& os) {
  os.write(container_magic, sizeof container_magic);
  put<std::uint32_t>(os, container_version);
  put<std::uint32_t>(os, std::uint32_t(chain.n));
  put<std::uint32_t>(os, std::uint32_t(chain.nvars));
  put<std::uint32_t>(os, std::uint32_t(chain.chains.size()));
  put<std::uint64_t>(os, chain.seed);
  for (std::size_t c = 0; c < chain.chains.size(); ++c) {
    put<std::uint64_t>(os, chain.chains[c].size());
    put<double>(os, c < chain.acceptance.size() ? chain.acceptance[c] : 0.0);
    put<double>(os, c < chain.step.size() ? chain.step[c] : 0.0);
  }
  for (const auto& states : chain.chains)
    for (const auto& x : states) {
      if (x.size() != chain.nvars || x.dim() != chain.n) throw ContainerError("chain container: inconsistent state");
      for (const auto& a : x)
        for (int i = 0; i < a.rows(); ++i)
          for (int j = 0; j < a.cols(); ++j) {
            put<double>(os, a(i, j).real());
            put<double>(os, a(i, j).imag());
          }
    }
  if (!os) throw ContainerError("chain container: write failed");
}

SampleChain read_chain(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, container_magic, sizeof magic) != 0)
    throw ContainerError("chain container: bad magic");
  const auto version = get<std::uint32_t>(is);
  if (version != container_version)
    throw ContainerError("chain container: unsupported version " + std::to_string(version));
  SampleChain chain;
  chain.n = int(get<std::uint32_t>(is));
  chain.nvars = int(get<std::uint32_t>(is));
  const auto k = get<std::uint32_t>(is);
  chain.seed = get<std::uint64_t>(is);
  if (chain.n < 1 || chain.nvars < 1) throw ContainerError("chain container: empty shape");
  std::vector<std::uint64_t> lengths(k);
  chain.acceptance.resize(k);
  chain.step.resize(k);
  for (std::uint32_t c = 0; c < k; ++c) {
    lengths[c] = get<std::uint64_t>(is);
    chain.acceptance[c] = get<double>(is);
    chain.step[c] = get<double>(is);
  }
  chain.chains.resize(k);
  for (std::uint32_t c = 0; c < k; ++c) {
    chain.chains[c].reserve(lengths[c]);
    for (std::uint64_t s = 0; s < lengths[c]; ++s) {
      MatrixTuple x(chain.nvars, chain.n);
      for (auto& a : x)
        for (int i = 0; i < chain.n; ++i)
          for (int j = 0; j < chain.n; ++j) {
            const double re = get<double>(is);
            const double im = get<double>(is);
            a(i, j) = Complex(re, im);
          }
      chain.chains[c].push_back(std::move(x));
    }
  }
  return chain;
}

void save_chain(const SampleChain& chain, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ContainerError("chain container: cannot open " + path);
  write_chain(chain, os);
}

SampleChain load_chain(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ContainerError("chain container: cannot open " + path);
  return read_chain(is);
}

}  // namespace mmlab
