#pragma once

#include "mmlab/sampler.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace mmlab {

// Chain checkpoint layout, all integers and doubles little-endian:
//   bytes 0..7   magic "MMLABCHN"
//   u32          version (1)
//   u32          N
//   u32          m (matrices per state)
//   u32          chain count K
//   u64          master seed
//   K x {u64 length, f64 acceptance, f64 step}
//   states in chain order; each state is m matrices, each N x N entries
//   in row-major order stored as (re, im) f64 pairs.
class ContainerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char container_magic[8] = {'M', 'M', 'L', 'A', 'B', 'C', 'H', 'N'};
inline constexpr std::uint32_t container_version = 1;

void write_chain(const SampleChain& chain, std::ostream& os);
SampleChain read_chain(std::istream& is);
void save_chain(const SampleChain& chain, const std::string& path);
SampleChain load_chain(const std::string& path);

}  // namespace mmlab
