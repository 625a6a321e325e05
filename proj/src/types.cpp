#include "sspd/types.hpp"

#include <charconv>

namespace sspd {

std::string format_ipv4(std::uint32_t ip) {
  return std::to_string(ip >> 24) + '.' + std::to_string((ip >> 16) & 0xFF) + '.' +
         std::to_string((ip >> 8) & 0xFF) + '.' + std::to_string(ip & 0xFF);
}

bool parse_ipv4(const std::string& text, std::uint32_t& ip) {
  const char* p = text.data();
  const char* end = p + text.size();
  if (text.find('.') == std::string::npos) {
    auto [ptr, ec] = std::from_chars(p, end, ip);
    return ec == std::errc{} && ptr == end;
  }
  std::uint32_t value = 0;
  for (int part = 0; part < 4; ++part) {
    unsigned octet = 0;
    auto [ptr, ec] = std::from_chars(p, end, octet);
    if (ec != std::errc{} || octet > 255 || ptr == p) return false;
    value = (value << 8) | octet;
    p = ptr;
    if (part < 3) {
      if (p == end || *p != '.') return false;
      ++p;
    }
  }
  if (p != end) return false;
  ip = value;
  return true;
}

}  // namespace sspd
