#include "vignette/util.hpp"

#include <cctype>

namespace vignette {

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

std::string slugify(std::string_view text) {
  std::string out;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out.push_back(static_cast<char>(std::tolower(u)));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? std::string("item") : out;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  // 2^64 mod n; values below it would bias the low residues.
  const std::uint64_t threshold = (std::uint64_t{0} - n) % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v < threshold);
  return v % n;
}

}  // namespace vignette
