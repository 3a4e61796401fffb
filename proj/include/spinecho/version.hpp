#ifndef SPINECHO_VERSION_HPP
#define SPINECHO_VERSION_HPP

namespace spinecho {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // SPINECHO_VERSION_HPP
