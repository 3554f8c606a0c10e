#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcpad::binio {

// Little-endian primitives used by the MCRM / MCCB / checkpoint containers.

void write_magic(std::ostream& out, std::string_view magic);
void expect_magic(std::istream& in, std::string_view magic, const std::string& what);

void write_u32(std::ostream& out, std::uint32_t v);
std::uint32_t read_u32(std::istream& in);

void write_f32(std::ostream& out, std::span<const float> values);
void read_f32(std::istream& in, std::span<float> values);

void write_bytes(std::ostream& out, std::span<const std::uint8_t> bytes);
void read_bytes(std::istream& in, std::span<std::uint8_t> bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace mcpad::binio
