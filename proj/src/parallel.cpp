#include "ckidx/parallel.hpp"

#include <cstdlib>
#include <fstream>
#include <string>

namespace ckidx {

std::size_t detect_l3_bytes() {
  for (int index = 0; index < 8; ++index) {
    const std::string dir =
        "/sys/devices/system/cpu/cpu0/cache/index" + std::to_string(index) + "/";
    std::ifstream level_file(dir + "level");
    int level = 0;
    if (!(level_file >> level) || level != 3) continue;
    std::ifstream size_file(dir + "size");
    std::string text;
    if (!(size_file >> text) || text.empty()) return 0;
    std::size_t value = std::stoull(text);
    switch (text.back()) {
      case 'K': value <<= 10; break;
      case 'M': value <<= 20; break;
      case 'G': value <<= 30; break;
      default: break;
    }
    return value;
  }
  return 0;
}

std::size_t default_cache_bytes(std::size_t p) {
  if (const char* env = std::getenv("CKIDX_CACHE_BYTES")) {
    const auto v = std::strtoull(env, nullptr, 10);
    if (v > 0) return v;
  }
  if (p == 0) p = 1;
  static const std::size_t l3 = detect_l3_bytes();
  if (l3 == 0) return std::size_t{2} << 20;
  return l3 / p;
}

}  // namespace ckidx
