#pragma once

#include <array>
#include <cstdint>

namespace ped {

// Embedded 5x7 uppercase bitmap font. Each glyph is 7 rows of 5 bits,
// bit 4 = leftmost column. Rendered with integer upscaling, so glyph
// bitmaps are identical on every platform.
inline constexpr int kFontCols = 5;
inline constexpr int kFontRows = 7;

inline constexpr std::array<std::array<std::uint8_t, 7>, 26> kFontAZ = {{
    // A
    {{0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001}},
    // B
    {{0b11110, 0b10001, 0b11110, 0b10001, 0b10001, 0b10001, 0b11110}},
    // C
    {{0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110}},
    // D
    {{0b11110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b11110}},
    // E
    {{0b11111, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000, 0b11111}},
    // F
    {{0b11111, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000, 0b10000}},
    // G
    {{0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111}},
    // H
    {{0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001, 0b10001}},
    // I
    {{0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
    // J
    {{0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100}},
    // K
    {{0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001}},
    // L
    {{0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111}},
    // M
    {{0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001}},
    // N
    {{0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001, 0b10001}},
    // O
    {{0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110}},
    // P
    {{0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000}},
    // Q
    {{0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101}},
    // R
    {{0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001}},
    // S
    {{0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110}},
    // T
    {{0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100}},
    // U
    {{0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110}},
    // V
    {{0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100}},
    // W
    {{0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b11011, 0b10001}},
    // X
    {{0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001}},
    // Y
    {{0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100, 0b00100}},
    // Z
    {{0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111}},
}};

inline constexpr bool glyph_bit(char letter, int row, int col) {
  return (kFontAZ[letter - 'A'][row] >> (kFontCols - 1 - col)) & 1u;
}

}  // namespace ped
