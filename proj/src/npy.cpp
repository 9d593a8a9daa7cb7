#include "splitconv/npy.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace splitconv {

namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw InputError(path + ": " + msg);
}

// pull the value of a python-dict key out of the header text
std::string header_field(const std::string& header, const std::string& key,
                         const std::string& path) {
    auto pos = header.find("'" + key + "'");
    if (pos == std::string::npos) fail(path, "header missing key '" + key + "'");
    pos = header.find(':', pos);
    if (pos == std::string::npos) fail(path, "malformed header near '" + key + "'");
    ++pos;
    while (pos < header.size() && header[pos] == ' ') ++pos;
    std::size_t end = pos;
    if (header[pos] == '\'') {
        end = header.find('\'', pos + 1);
        if (end == std::string::npos) fail(path, "unterminated string in header");
        return header.substr(pos + 1, end - pos - 1);
    }
    if (header[pos] == '(') {
        end = header.find(')', pos);
        if (end == std::string::npos) fail(path, "unterminated shape tuple in header");
        return header.substr(pos, end - pos + 1);
    }
    while (end < header.size() && header[end] != ',' && header[end] != '}') ++end;
    return header.substr(pos, end - pos);
}

std::vector<std::size_t> parse_shape(const std::string& tuple, const std::string& path) {
    std::vector<std::size_t> shape;
    std::string digits;
    for (char c : tuple) {
        if (c >= '0' && c <= '9') {
            digits += c;
        } else if (!digits.empty()) {
            shape.push_back(static_cast<std::size_t>(std::stoull(digits)));
            digits.clear();
        }
    }
    if (!digits.empty()) shape.push_back(static_cast<std::size_t>(std::stoull(digits)));
    if (shape.empty()) fail(path, "empty shape tuple");
    return shape;
}

} // namespace

Tensor load_array(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");

    char magic[6];
    if (!in.read(magic, 6) || std::memcmp(magic, kMagic, 6) != 0) fail(path, "bad magic");

    unsigned char version[2];
    if (!in.read(reinterpret_cast<char*>(version), 2)) fail(path, "truncated version bytes");
    if (version[0] != 1) fail(path, "unsupported npy version " + std::to_string(version[0]));

    unsigned char len_bytes[2];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 2)) fail(path, "truncated header length");
    std::size_t header_len = static_cast<std::size_t>(len_bytes[0]) |
                             (static_cast<std::size_t>(len_bytes[1]) << 8);

    std::string header(header_len, '\0');
    if (!in.read(header.data(), static_cast<std::streamsize>(header_len)))
        fail(path, "truncated header");

    const std::string descr = header_field(header, "descr", path);
    const std::string order = header_field(header, "fortran_order", path);
    const std::string shape_str = header_field(header, "shape", path);

    if (order.find("True") != std::string::npos)
        fail(path, "fortran_order True is not supported");
    if (descr != "<f8" && descr != "<f4")
        fail(path, "unsupported dtype '" + descr + "' (expected <f8 or <f4)");

    std::vector<std::size_t> shape = parse_shape(shape_str, path);
    std::size_t count = 1;
    for (std::size_t e : shape) count *= e;

    const std::size_t item = descr == "<f8" ? 8 : 4;
    std::vector<char> payload(count * item);
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size())
        fail(path, "payload length mismatch");
    // anything trailing is also a corrupt file
    char extra;
    if (in.read(&extra, 1)) fail(path, "payload length mismatch");

    std::vector<double> data(count);
    if (descr == "<f8") {
        std::memcpy(data.data(), payload.data(), payload.size());
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            float v;
            std::memcpy(&v, payload.data() + i * 4, 4);
            data[i] = static_cast<double>(v); // exact widening
        }
    }
    return Tensor(std::move(shape), std::move(data));
}

void save_array(const std::string& path, const Tensor& t) {
    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (";
    const auto& shape = t.shape();
    for (std::size_t i = 0; i < shape.size(); ++i) {
        dict += std::to_string(shape[i]);
        if (shape.size() == 1 || i + 1 < shape.size()) dict += ",";
        if (i + 1 < shape.size()) dict += " ";
    }
    dict += "), }";
    // pad so that magic+version+len+header is a multiple of 64, newline-terminated
    std::size_t unpadded = 6 + 2 + 2 + dict.size() + 1;
    std::size_t padding = (64 - unpadded % 64) % 64;
    dict.append(padding, ' ');
    dict += '\n';

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open file for writing");
    out.write(kMagic, 6);
    unsigned char version[2] = {1, 0};
    out.write(reinterpret_cast<const char*>(version), 2);
    unsigned char len_bytes[2] = {static_cast<unsigned char>(dict.size() & 0xff),
                                  static_cast<unsigned char>((dict.size() >> 8) & 0xff)};
    out.write(reinterpret_cast<const char*>(len_bytes), 2);
    out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!out) fail(path, "write failed");
}

} // namespace splitconv
