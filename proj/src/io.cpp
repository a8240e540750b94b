#include "lrbathy/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "lrbathy/error.hpp"

namespace lrb {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

constexpr char kSurfaceMagic[4] = {'L', 'R', 'B', 'S'};
constexpr char kPointsMagic[4] = {'L', 'R', 'B', 'P'};
constexpr char kTextMagic[] = "LRBS-TEXT";
constexpr std::uint32_t kPointsVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InputError("unexpected end of binary file");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n > (1u << 20)) throw InputError("string field too long in binary file");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw InputError("unexpected end of binary file");
  return s;
}

// Sorted tables of every coordinate referenced by the surface.
struct CoordinateTables {
  std::vector<double> u;
  std::vector<double> v;

  explicit CoordinateTables(const LRSurface& s) {
    const auto& m = s.mesh();
    for (const auto& seg : m.segments()) {
      auto& along = seg.dir == Direction::ConstU ? v : u;
      auto& across = seg.dir == Direction::ConstU ? u : v;
      across.push_back(seg.value);
      along.push_back(seg.start);
      along.push_back(seg.stop);
    }
    for (const auto& e : m.elements()) {
      u.insert(u.end(), {e.umin, e.umax});
      v.insert(v.end(), {e.vmin, e.vmax});
    }
    for (const auto& b : s.bsplines()) {
      u.insert(u.end(), b.knots_u.begin(), b.knots_u.end());
      v.insert(v.end(), b.knots_v.begin(), b.knots_v.end());
    }
    for (auto* t : {&u, &v}) {
      std::sort(t->begin(), t->end());
      t->erase(std::unique(t->begin(), t->end()), t->end());
    }
  }

  static std::uint32_t index(const std::vector<double>& t, double x) {
    auto it = std::lower_bound(t.begin(), t.end(), x);
    return static_cast<std::uint32_t>(it - t.begin());
  }
  std::uint32_t iu(double x) const { return index(u, x); }
  std::uint32_t iv(double x) const { return index(v, x); }
};

double lookup(const std::vector<double>& t, std::uint64_t i) {
  if (i >= t.size()) throw InputError("coordinate index out of range in surface file");
  return t[i];
}

void check_degree(std::uint32_t d) {
  if (d < 1 || d > 5) throw InputError("surface file has an unsupported degree");
}

LRSurface assemble(const Box& domain, int du, int dv, std::vector<Segment> segs, std::vector<Box> elems,
                   std::vector<ScaledBSpline> bs, UnitTags units) {
  BoxMesh mesh = BoxMesh::from_parts(domain, du, dv, segs, std::move(elems));
  return LRSurface::from_parts(std::move(mesh), std::move(bs), std::move(units));
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view s, double& out) {
  s = s.substr(0, s.find_last_not_of(" \t\r") + 1);
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto r = std::from_chars(first, last, out);
  return r.ec == std::errc() && r.ptr == last;
}

void apply_header(Survey& s, const std::string& key, const std::string& value, std::optional<std::size_t>& count,
                  std::size_t line) {
  auto fail = [&](const std::string& why) {
    throw InputError("survey header line " + std::to_string(line) + ": " + why);
  };
  if (key == "id") {
    s.id = value;
  } else if (key == "score") {
    double x = 0.0;
    if (!parse_double(value, x) || x < 0.0 || x > 1.0) fail("score must be a number in [0, 1]");
    s.meta.score = x;
  } else if (key == "method") {
    s.meta.method = value;
  } else if (key == "date") {
    s.meta.date = value;
  } else if (key == "density") {
    double x = 0.0;
    if (!parse_double(value, x) || x < 0.0) fail("density must be a nonnegative number");
    s.meta.density = x;
  } else if (key == "provenance") {
    s.meta.provenance = value;
  } else if (key == "units") {
    std::istringstream ss(value);
    std::string h, v, extra;
    ss >> h >> v >> extra;
    if (h.empty() || !extra.empty()) fail("units must be '<unit>' or '<horizontal> <vertical>'");
    s.meta.horizontal_units = h;
    s.meta.vertical_units = v.empty() ? h : v;
  } else if (key == "count") {
    double x = 0.0;
    if (!parse_double(value, x) || x < 0.0 || x != std::floor(x)) fail("count must be a nonnegative integer");
    count = static_cast<std::size_t>(x);
  }
}

std::string header_text(const Survey& s) {
  std::ostringstream h;
  if (!s.id.empty()) h << "# id: " << s.id << '\n';
  if (s.meta.score) h << "# score: " << format_exact(*s.meta.score) << '\n';
  if (!s.meta.method.empty()) h << "# method: " << s.meta.method << '\n';
  if (!s.meta.date.empty()) h << "# date: " << s.meta.date << '\n';
  if (s.meta.density) h << "# density: " << format_exact(*s.meta.density) << '\n';
  if (!s.meta.provenance.empty()) h << "# provenance: " << s.meta.provenance << '\n';
  if (!s.meta.horizontal_units.empty()) {
    h << "# units: " << s.meta.horizontal_units << ' ' << s.meta.vertical_units << '\n';
  }
  h << "# count: " << s.points.size() << '\n';
  return h.str();
}

void parse_header_line(Survey& s, const std::string& line, std::optional<std::size_t>& count, std::size_t ln) {
  const std::string body = trim(line.substr(1));
  const auto colon = body.find(':');
  if (colon == std::string::npos) return;  // plain comment
  std::string key = trim(body.substr(0, colon));
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  apply_header(s, key, trim(body.substr(colon + 1)), count, ln);
}

}  // namespace

std::string format_exact(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Binary surface

void write_surface_binary(const LRSurface& s, std::ostream& out) {
  const CoordinateTables t(s);
  const Box& d = s.domain();
  out.write(kSurfaceMagic, 4);
  put<std::uint32_t>(out, kSurfaceFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.degree_u()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.degree_v()));
  for (double x : {d.umin, d.umax, d.vmin, d.vmax}) put<double>(out, x);
  put_string(out, s.units().horizontal);
  put_string(out, s.units().vertical);
  for (const auto* table : {&t.u, &t.v}) {
    put<std::uint64_t>(out, table->size());
    for (double x : *table) put<double>(out, x);
  }
  const auto segs = s.mesh().segments();
  put<std::uint64_t>(out, segs.size());
  for (const auto& g : segs) {
    const bool cu = g.dir == Direction::ConstU;
    put<std::uint8_t>(out, cu ? 0 : 1);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(g.multiplicity));
    put<std::uint32_t>(out, cu ? t.iu(g.value) : t.iv(g.value));
    put<std::uint32_t>(out, cu ? t.iv(g.start) : t.iu(g.start));
    put<std::uint32_t>(out, cu ? t.iv(g.stop) : t.iu(g.stop));
  }
  const auto& elems = s.mesh().elements();
  put<std::uint64_t>(out, elems.size());
  for (const auto& e : elems) {
    put<std::uint32_t>(out, t.iu(e.umin));
    put<std::uint32_t>(out, t.iu(e.umax));
    put<std::uint32_t>(out, t.iv(e.vmin));
    put<std::uint32_t>(out, t.iv(e.vmax));
  }
  put<std::uint64_t>(out, s.size());
  for (const auto& b : s.bsplines()) {
    for (double k : b.knots_u) put<std::uint32_t>(out, t.iu(k));
    for (double k : b.knots_v) put<std::uint32_t>(out, t.iv(k));
    put<double>(out, b.scaling);
    put<double>(out, b.coefficient);
  }
  if (!out) throw Error("failed to write surface");
}

std::size_t binary_size(const LRSurface& s) {
  const CoordinateTables t(s);
  std::size_t n = 4 + 3 * 4 + 4 * 8;
  n += 4 + s.units().horizontal.size() + 4 + s.units().vertical.size();
  n += 8 + 8 * t.u.size() + 8 + 8 * t.v.size();
  n += 8 + s.mesh().segments().size() * (1 + 1 + 3 * 4);
  n += 8 + s.mesh().elements().size() * 16;
  n += 8 + s.size() * (4 * static_cast<std::size_t>(s.degree_u() + s.degree_v() + 4) + 16);
  return n;
}

LRSurface read_surface_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kSurfaceMagic, 4) != 0) throw InputError("not a binary LR surface file");
  const auto version = get<std::uint32_t>(in);
  if (version != kSurfaceFormatVersion) {
    throw InputError("unsupported surface format version " + std::to_string(version));
  }
  const auto du = get<std::uint32_t>(in);
  const auto dv = get<std::uint32_t>(in);
  check_degree(du);
  check_degree(dv);
  Box d;
  d.umin = get<double>(in);
  d.umax = get<double>(in);
  d.vmin = get<double>(in);
  d.vmax = get<double>(in);
  UnitTags units;
  units.horizontal = get_string(in);
  units.vertical = get_string(in);
  auto read_table = [&] {
    const auto n = get<std::uint64_t>(in);
    if (n > (1ull << 32)) throw InputError("coordinate table too large");
    std::vector<double> t(n);
    for (auto& x : t) x = get<double>(in);
    return t;
  };
  const auto tu = read_table();
  const auto tv = read_table();

  std::vector<Segment> segs(get<std::uint64_t>(in));
  for (auto& g : segs) {
    const auto dir = get<std::uint8_t>(in);
    if (dir > 1) throw InputError("bad segment direction in surface file");
    g.dir = dir == 0 ? Direction::ConstU : Direction::ConstV;
    g.multiplicity = get<std::uint8_t>(in);
    const auto a = get<std::uint32_t>(in);
    const auto b = get<std::uint32_t>(in);
    const auto c = get<std::uint32_t>(in);
    const auto& across = g.dir == Direction::ConstU ? tu : tv;
    const auto& along = g.dir == Direction::ConstU ? tv : tu;
    g.value = lookup(across, a);
    g.start = lookup(along, b);
    g.stop = lookup(along, c);
  }
  std::vector<Box> elems(get<std::uint64_t>(in));
  for (auto& e : elems) {
    e.umin = lookup(tu, get<std::uint32_t>(in));
    e.umax = lookup(tu, get<std::uint32_t>(in));
    e.vmin = lookup(tv, get<std::uint32_t>(in));
    e.vmax = lookup(tv, get<std::uint32_t>(in));
  }
  std::vector<ScaledBSpline> bs(get<std::uint64_t>(in));
  for (auto& b : bs) {
    b.knots_u.resize(du + 2);
    b.knots_v.resize(dv + 2);
    for (auto& k : b.knots_u) k = lookup(tu, get<std::uint32_t>(in));
    for (auto& k : b.knots_v) k = lookup(tv, get<std::uint32_t>(in));
    b.scaling = get<double>(in);
    b.coefficient = get<double>(in);
  }
  return assemble(d, static_cast<int>(du), static_cast<int>(dv), std::move(segs), std::move(elems), std::move(bs),
                  std::move(units));
}

// ---------------------------------------------------------------------------
// Text surface

void write_surface_text(const LRSurface& s, std::ostream& out) {
  const CoordinateTables t(s);
  const Box& d = s.domain();
  out << kTextMagic << ' ' << kSurfaceFormatVersion << '\n';
  out << "degrees " << s.degree_u() << ' ' << s.degree_v() << '\n';
  out << "domain " << format_exact(d.umin) << ' ' << format_exact(d.umax) << ' ' << format_exact(d.vmin) << ' '
      << format_exact(d.vmax) << '\n';
  out << "units " << s.units().horizontal << ' ' << s.units().vertical << '\n';
  out << "u_coordinates " << t.u.size() << '\n';
  for (double x : t.u) out << format_exact(x) << '\n';
  out << "v_coordinates " << t.v.size() << '\n';
  for (double x : t.v) out << format_exact(x) << '\n';
  const auto segs = s.mesh().segments();
  out << "segments " << segs.size() << '\n';
  for (const auto& g : segs) {
    const bool cu = g.dir == Direction::ConstU;
    out << (cu ? 'u' : 'v') << ' ' << (cu ? t.iu(g.value) : t.iv(g.value)) << ' '
        << (cu ? t.iv(g.start) : t.iu(g.start)) << ' ' << (cu ? t.iv(g.stop) : t.iu(g.stop)) << ' '
        << g.multiplicity << '\n';
  }
  out << "elements " << s.mesh().elements().size() << '\n';
  for (const auto& e : s.mesh().elements()) {
    out << t.iu(e.umin) << ' ' << t.iu(e.umax) << ' ' << t.iv(e.vmin) << ' ' << t.iv(e.vmax) << '\n';
  }
  out << "bsplines " << s.size() << '\n';
  for (const auto& b : s.bsplines()) {
    for (double k : b.knots_u) out << t.iu(k) << ' ';
    for (double k : b.knots_v) out << t.iv(k) << ' ';
    out << format_exact(b.scaling) << ' ' << format_exact(b.coefficient) << '\n';
  }
  if (!out) throw Error("failed to write surface");
}

LRSurface read_surface_text(std::istream& in) {
  auto expect = [&](const char* key) {
    std::string k;
    if (!(in >> k) || k != key) throw InputError(std::string("surface text file: expected '") + key + "'");
  };
  auto number = [&](auto& x) {
    if (!(in >> x)) throw InputError("surface text file: malformed number");
  };
  auto real = [&]() {
    std::string tok;
    double x = 0.0;
    if (!(in >> tok) || !parse_double(tok, x)) throw InputError("surface text file: malformed number");
    return x;
  };
  expect(kTextMagic);
  std::uint32_t version = 0;
  number(version);
  if (version != kSurfaceFormatVersion) throw InputError("unsupported surface format version");
  expect("degrees");
  std::uint32_t du = 0, dv = 0;
  number(du);
  number(dv);
  check_degree(du);
  check_degree(dv);
  expect("domain");
  Box d;
  d.umin = real();
  d.umax = real();
  d.vmin = real();
  d.vmax = real();
  expect("units");
  UnitTags units;
  in >> units.horizontal >> units.vertical;
  auto table = [&](const char* key) {
    expect(key);
    std::size_t n = 0;
    number(n);
    std::vector<double> t(n);
    for (auto& x : t) x = real();
    return t;
  };
  const auto tu = table("u_coordinates");
  const auto tv = table("v_coordinates");
  expect("segments");
  std::size_t ns = 0;
  number(ns);
  std::vector<Segment> segs(ns);
  for (auto& g : segs) {
    char dir = 0;
    std::uint64_t a = 0, b = 0, c = 0;
    in >> dir;
    number(a);
    number(b);
    number(c);
    number(g.multiplicity);
    if (dir != 'u' && dir != 'v') throw InputError("surface text file: bad segment direction");
    g.dir = dir == 'u' ? Direction::ConstU : Direction::ConstV;
    const auto& across = dir == 'u' ? tu : tv;
    const auto& along = dir == 'u' ? tv : tu;
    g.value = lookup(across, a);
    g.start = lookup(along, b);
    g.stop = lookup(along, c);
  }
  expect("elements");
  std::size_t ne = 0;
  number(ne);
  std::vector<Box> elems(ne);
  for (auto& e : elems) {
    std::uint64_t a = 0, b = 0, c = 0, f = 0;
    number(a);
    number(b);
    number(c);
    number(f);
    e = {lookup(tu, a), lookup(tu, b), lookup(tv, c), lookup(tv, f)};
  }
  expect("bsplines");
  std::size_t nb = 0;
  number(nb);
  std::vector<ScaledBSpline> bs(nb);
  for (auto& b : bs) {
    b.knots_u.resize(du + 2);
    b.knots_v.resize(dv + 2);
    for (auto& k : b.knots_u) {
      std::uint64_t i = 0;
      number(i);
      k = lookup(tu, i);
    }
    for (auto& k : b.knots_v) {
      std::uint64_t i = 0;
      number(i);
      k = lookup(tv, i);
    }
    b.scaling = real();
    b.coefficient = real();
  }
  return assemble(d, static_cast<int>(du), static_cast<int>(dv), std::move(segs), std::move(elems), std::move(bs),
                  std::move(units));
}

void save_surface(const LRSurface& s, const std::filesystem::path& p) {
  const bool text = p.extension() == ".lrt";
  std::ofstream out(p, text ? std::ios::out : std::ios::out | std::ios::binary);
  if (!out) throw InputError("cannot open " + p.string() + " for writing");
  if (text) {
    write_surface_text(s, out);
  } else {
    write_surface_binary(s, out);
  }
}

LRSurface load_surface(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open surface file " + p.string());
  char magic[4] = {};
  in.read(magic, 4);
  in.clear();
  in.seekg(0);
  try {
    if (std::memcmp(magic, kSurfaceMagic, 4) == 0) return read_surface_binary(in);
    return read_surface_text(in);
  } catch (const InputError& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Surveys

Survey read_survey(std::istream& in, const std::string& fallback_id) {
  Survey s;
  std::optional<std::size_t> count;

  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(magic, kPointsMagic, 4) == 0;
  if (binary) {
    const auto version = get<std::uint32_t>(in);
    if (version != kPointsVersion) throw InputError("unsupported point format version");
    std::istringstream header(get_string(in));
    std::string line;
    std::size_t ln = 0;
    while (std::getline(header, line)) {
      ++ln;
      if (!line.empty() && line[0] == '#') parse_header_line(s, line, count, ln);
    }
    const auto n = get<std::uint64_t>(in);
    if (count && *count != n) throw InputError("declared count does not match the stored point count");
    s.points.resize(n);
    for (auto& p : s.points) {
      p.x = get<double>(in);
      p.y = get<double>(in);
      p.z = get<double>(in);
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
        throw InputError("non-finite coordinate in binary point file");
      }
    }
  } else {
    in.clear();
    in.seekg(0);
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
      ++ln;
      const std::string t = trim(line);
      if (t.empty()) continue;
      if (t[0] == '#') {
        parse_header_line(s, t, count, ln);
        continue;
      }
      std::string row = t;
      std::replace(row.begin(), row.end(), ',', ' ');
      std::replace(row.begin(), row.end(), ';', ' ');
      std::replace(row.begin(), row.end(), '\t', ' ');
      std::istringstream fields(row);
      std::string a, b, c, extra;
      fields >> a >> b >> c;
      Point3 p;
      if (c.empty() || !parse_double(a, p.x) || !parse_double(b, p.y) || !parse_double(c, p.z)) {
        throw InputError("line " + std::to_string(ln) + ": expected three numbers 'x y z'");
      }
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
        throw InputError("line " + std::to_string(ln) + ": non-finite coordinate");
      }
      s.points.push_back(p);
    }
    if (count && *count != s.points.size()) {
      throw InputError("declared count " + std::to_string(*count) + " does not match " +
                       std::to_string(s.points.size()) + " data rows");
    }
  }
  if (s.id.empty()) s.id = fallback_id;
  return s;
}

Survey load_survey(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open point file " + p.string());
  try {
    return read_survey(in, p.stem().string());
  } catch (const InputError& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

std::vector<Point3> load_points(const std::filesystem::path& p) { return load_survey(p).points; }

void write_survey_text(const Survey& s, std::ostream& out) {
  out << header_text(s);
  for (const auto& p : s.points) {
    out << format_exact(p.x) << ' ' << format_exact(p.y) << ' ' << format_exact(p.z) << '\n';
  }
}

void write_survey_binary(const Survey& s, std::ostream& out) {
  out.write(kPointsMagic, 4);
  put<std::uint32_t>(out, kPointsVersion);
  put_string(out, header_text(s));
  put<std::uint64_t>(out, s.points.size());
  for (const auto& p : s.points) {
    put<double>(out, p.x);
    put<double>(out, p.y);
    put<double>(out, p.z);
  }
}

void save_survey(const Survey& s, const std::filesystem::path& p) {
  const bool binary = p.extension() == ".lrp";
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot open " + p.string() + " for writing");
  if (binary) {
    write_survey_binary(s, out);
  } else {
    write_survey_text(s, out);
  }
  if (!out) throw Error("failed to write " + p.string());
}

}  // namespace lrb
