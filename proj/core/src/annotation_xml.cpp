// Copyright 2026 The mitocount Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mitocount/annotation_xml.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "mitocount/error.hpp"

namespace mitocount {
namespace {

// Attribute and comment nodes, not elements.
bool is_markup(const std::string& name) { return name == "<xmlattr>" || name == "<xmlcomment>"; }

namespace pt = boost::property_tree;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos) s = decimals > 0 ? "0." + std::string(decimals, '0') : "0";
  return s;
}

double quantize(double v, int decimals) { return std::stod(fixed(v, decimals)); }

Point2 quantize(Point2 p) { return {quantize(p.x, kCoordinateDecimals), quantize(p.y, kCoordinateDecimals)}; }

std::string coord(double v) { return fixed(v, kCoordinateDecimals); }

double parse_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError(where + ": '" + text + "' is not a finite number");
  }
  return v;
}

int parse_int(const std::string& text, const std::string& where) {
  int v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(where + ": '" + text + "' is not an integer");
  return v;
}

std::string attr(const pt::ptree& node, const std::string& name, const std::string& where) {
  auto v = node.get_optional<std::string>("<xmlattr>." + name);
  if (!v) throw ParseError(where + ": missing attribute '" + name + "'");
  return *v;
}

std::vector<Point2> parse_points(const std::string& text, const std::string& where) {
  std::vector<Point2> out;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    const auto comma = token.find(',');
    if (comma == std::string::npos) throw ParseError(where + ": contour point '" + token + "' is not 'x,y'");
    out.push_back({parse_double(token.substr(0, comma), where), parse_double(token.substr(comma + 1), where)});
  }
  return out;
}

std::vector<int> parse_ids(const std::string& text, const std::string& where) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string token;
  while (in >> token) out.push_back(parse_int(token, where));
  return out;
}

}  // namespace

AnnotationDoc quantized(const AnnotationDoc& doc) {
  AnnotationDoc q = doc;
  q.mpp = quantize(doc.mpp, kMppDecimals);
  for (auto& f : q.figures) {
    f.x = quantize(f.x, kCoordinateDecimals);
    f.y = quantize(f.y, kCoordinateDecimals);
    f.width_um = quantize(f.width_um, kCoordinateDecimals);
    for (auto& p : f.contour) p = quantize(p);
  }
  if (q.hpf) {
    q.hpf->center = quantize(q.hpf->center);
    q.hpf->side_px = quantize(q.hpf->side_px, kCoordinateDecimals);
  }
  return q;
}

void validate(const AnnotationDoc& doc) {
  if (doc.slide_id.empty()) throw ParseError("<annotation>: empty slide_id");
  if (!(doc.mpp > 0.0) || !std::isfinite(doc.mpp)) throw ParseError("<annotation>: mpp must be positive");
  std::set<int> ids;
  for (const auto& f : doc.figures) {
    const std::string where = "<figure id=\"" + std::to_string(f.id) + "\">";
    if (!ids.insert(f.id).second) throw ParseError(where + ": duplicate figure id");
    if (!std::isfinite(f.x) || !std::isfinite(f.y) || !std::isfinite(f.width_um) || f.width_um < 0.0) {
      throw ParseError(where + ": non-finite coordinates or negative width");
    }
  }
  if (doc.hpf) {
    const auto& h = *doc.hpf;
    if (h.count != static_cast<int>(h.member_ids.size())) {
      throw ParseError("<hpf>: count " + std::to_string(h.count) + " differs from " +
                       std::to_string(h.member_ids.size()) + " members");
    }
    std::set<int> seen;
    for (int id : h.member_ids) {
      if (!ids.contains(id)) throw ParseError("<hpf>: member id " + std::to_string(id) + " is not a figure");
      if (!seen.insert(id).second) throw ParseError("<hpf>: member id " + std::to_string(id) + " repeated");
    }
    if (!(h.side_px > 0.0)) throw ParseError("<hpf>: side_px must be positive");
  }
}

std::string annotation_to_xml(const AnnotationDoc& doc) {
  validate(doc);
  pt::ptree tree;
  pt::ptree& root = tree.add("annotation", "");
  root.put("<xmlattr>.version", 1);
  root.put("<xmlattr>.slide_id", doc.slide_id);
  root.put("<xmlattr>.mpp", fixed(doc.mpp, kMppDecimals));
  pt::ptree& figures = root.add("figures", "");
  figures.put("<xmlattr>.count", doc.figures.size());
  for (const auto& f : doc.figures) {
    pt::ptree& node = figures.add("figure", "");
    node.put("<xmlattr>.id", f.id);
    node.put("<xmlattr>.x", coord(f.x));
    node.put("<xmlattr>.y", coord(f.y));
    node.put("<xmlattr>.width_um", coord(f.width_um));
    std::string points;
    for (const auto& p : f.contour) {
      if (!points.empty()) points += ' ';
      points += coord(p.x) + ',' + coord(p.y);
    }
    node.add("contour", points);
  }
  if (doc.hpf) {
    pt::ptree& node = root.add("hpf", "");
    node.put("<xmlattr>.x", coord(doc.hpf->center.x));
    node.put("<xmlattr>.y", coord(doc.hpf->center.y));
    node.put("<xmlattr>.side_px", coord(doc.hpf->side_px));
    node.put("<xmlattr>.count", doc.hpf->count);
    std::string ids;
    for (int id : doc.hpf->member_ids) {
      if (!ids.empty()) ids += ' ';
      ids += std::to_string(id);
    }
    node.add("members", ids);
  }
  std::ostringstream out;
  pt::write_xml(out, tree, pt::xml_writer_make_settings<std::string>(' ', 2));
  return out.str();
}

AnnotationDoc annotation_from_xml(const std::string& xml) {
  pt::ptree tree;
  try {
    std::istringstream in(xml);
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed XML: ") + e.what());
  }
  const auto elements = std::count_if(tree.begin(), tree.end(), [](const auto& kv) { return !is_markup(kv.first); });
  auto root_opt = tree.get_child_optional("annotation");
  if (!root_opt || elements != 1) throw ParseError("<annotation>: missing or not the only root element");
  const pt::ptree& root = *root_opt;
  AnnotationDoc doc;
  doc.slide_id = attr(root, "slide_id", "<annotation>");
  doc.mpp = parse_double(attr(root, "mpp", "<annotation>"), "<annotation> mpp");
  bool seen_figures = false;
  for (const auto& [name, child] : root) {
    if (is_markup(name)) continue;
    if (name == "figures") {
      if (seen_figures) throw ParseError("<figures>: repeated");
      seen_figures = true;
      for (const auto& [fname, fnode] : child) {
        if (is_markup(fname)) continue;
        if (fname != "figure") throw ParseError("<figures>: unexpected element <" + fname + ">");
        AnnotatedFigure f;
        f.id = parse_int(attr(fnode, "id", "<figure>"), "<figure> id");
        const std::string where = "<figure id=\"" + std::to_string(f.id) + "\">";
        f.x = parse_double(attr(fnode, "x", where), where + " x");
        f.y = parse_double(attr(fnode, "y", where), where + " y");
        f.width_um = parse_double(attr(fnode, "width_um", where), where + " width_um");
        auto contour = fnode.get_child_optional("contour");
        if (!contour) throw ParseError(where + ": missing <contour>");
        f.contour = parse_points(contour->data(), where + " <contour>");
        doc.figures.push_back(std::move(f));
      }
      if (auto declared = child.get_optional<std::string>("<xmlattr>.count")) {
        if (parse_int(*declared, "<figures> count") != static_cast<int>(doc.figures.size())) {
          throw ParseError("<figures>: count attribute does not match the number of <figure> elements");
        }
      }
    } else if (name == "hpf") {
      if (doc.hpf) throw ParseError("<hpf>: repeated");
      AnnotatedHpf h;
      h.center = {parse_double(attr(child, "x", "<hpf>"), "<hpf> x"),
                  parse_double(attr(child, "y", "<hpf>"), "<hpf> y")};
      h.side_px = parse_double(attr(child, "side_px", "<hpf>"), "<hpf> side_px");
      h.count = parse_int(attr(child, "count", "<hpf>"), "<hpf> count");
      auto members = child.get_child_optional("members");
      if (!members) throw ParseError("<hpf>: missing <members>");
      h.member_ids = parse_ids(members->data(), "<hpf> <members>");
      doc.hpf = std::move(h);
    } else {
      throw ParseError("<annotation>: unexpected element <" + name + ">");
    }
  }
  if (!seen_figures) throw ParseError("<annotation>: missing <figures>");
  validate(doc);
  return doc;
}

void write_annotation_xml(const AnnotationDoc& doc, const std::filesystem::path& path) {
  const std::string xml = annotation_to_xml(doc);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << xml;
  if (!out) throw IoError("failed writing " + path.string());
}

AnnotationDoc read_annotation_xml(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return annotation_from_xml(text.str());
}

}  // namespace mitocount
