#include "polyhdiv/archive.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace polyhdiv {

namespace {

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
  // row-major little-endian float64
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      unsigned char buf[8];
      for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>(bits >> (8 * b));
      out.write(reinterpret_cast<const char*>(buf), 8);
    }
  }
}

Eigen::MatrixXd read_matrix(std::ifstream& in, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      unsigned char buf[8];
      in.read(reinterpret_cast<char*>(buf), 8);
      if (!in) throw UsageError("matrix payload truncated");
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
      double v;
      std::memcpy(&v, &bits, sizeof(v));
      m(i, j) = v;
    }
  }
  return m;
}

nlohmann::json spec_to_json(const ElementSpec& spec) {
  return {{"k", spec.k},
          {"l1", spec.l1},
          {"l2", spec.l2},
          {"m1", spec.m1},
          {"m2", spec.m2},
          {"setting", to_string(spec.setting)},
          {"config", to_string(spec.config)},
          {"projector", to_string(spec.projector)},
          {"h_target", spec.h_target},
          {"fe_order", spec.fe_order}};
}

ElementSpec spec_from_json(const nlohmann::json& j) {
  ElementSpec spec;
  spec.k = j.at("k").get<int>();
  spec.l1 = j.at("l1").get<int>();
  spec.l2 = j.at("l2").get<int>();
  spec.m1 = j.at("m1").get<int>();
  spec.m2 = j.at("m2").get<int>();
  spec.setting = j.at("setting").get<std::string>() == "reduced" ? Setting::Reduced
                                                                 : Setting::General;
  spec.config =
      j.at("config").get<std::string>() == "ia" ? NormalConfig::Ia : NormalConfig::Ib;
  spec.projector = projector_kind_from_string(j.at("projector").get<std::string>());
  spec.h_target = j.at("h_target").get<double>();
  spec.fe_order = j.at("fe_order").get<int>();
  return spec;
}

}  // namespace

void write_element_archive(const NodalBasis& nb, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  const SpaceBasis& space = *nb.space;
  const Polygon& poly = space.mesh->polygon();

  nlohmann::json doc;
  doc["format"] = "polyhdiv-element/1";
  doc["spec"] = spec_to_json(nb.dofs.spec);
  nlohmann::json verts = nlohmann::json::array();
  for (const Vec2& v : poly.vertices()) verts.push_back({v.x, v.y});
  doc["polygon"] = {{"vertices", verts}};

  doc["n_dofs"] = nb.size();
  doc["n_normal"] = nb.transfer.n_normal;
  doc["n_internal"] = nb.transfer.n_internal;
  doc["condition"] = nb.condition;
  doc["kronecker_defect"] = nb.kronecker_defect;
  doc["matrices"] = {{"file", "matrices.bin"},
                     {"layout", "row-major float64 little-endian"},
                     {"transfer_shape", {nb.transfer.matrix.rows(), nb.transfer.matrix.cols()}},
                     {"coeff_shape", {nb.coeff.rows(), nb.coeff.cols()}}};

  int c_normal = 0;
  int c_degenerate = 0;
  int c_internal = 0;
  nlohmann::json cls = nlohmann::json::array();
  for (DualClass c : nb.classification) {
    cls.push_back(to_string(c));
    if (c == DualClass::Normal) ++c_normal;
    if (c == DualClass::DegenerateNormal) ++c_degenerate;
    if (c == DualClass::Internal) ++c_internal;
  }
  doc["classification"] = cls;
  doc["counts"] = {{"normal", c_normal},
                   {"degenerate_normal", c_degenerate},
                   {"internal", c_internal}};

  nlohmann::json gens = nlohmann::json::array();
  for (const Generator& g : space.generators) {
    gens.push_back({{"block", to_string(g.block)},
                    {"edge", g.edge},
                    {"component", g.component},
                    {"poly_index", g.poly_index}});
  }
  doc["generators"] = gens;
  doc["extra_constant_generators"] =
      static_cast<int>(space.extra_constant_generators.size());
  doc["gram_rank"] = space.gram_rank;
  doc["gram_smin"] = space.gram_smin;
  doc["gram_smax"] = space.gram_smax;
  if (nb.dofs.spec.setting == Setting::Reduced) {
    doc["reduced_dimension"] = {
        {"series_formula", reduced_series_dimension_formula(nb.dofs.spec.k, poly.n_faces())},
        {"constructed", space.total_constructed()},
        {"gram_rank", space.gram_rank},
        {"element_dofs", nb.size()},
        {"note", "constructed count and series formula disagree; the rank value governs"}};
  }

  std::ofstream meta(fs::path(dir) / "element.json");
  meta << doc.dump(2) << "\n";

  std::ofstream bin(fs::path(dir) / "matrices.bin", std::ios::binary);
  write_matrix(bin, nb.transfer.matrix);
  write_matrix(bin, nb.coeff);
}

ElementArchive load_element_archive(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream meta(fs::path(dir) / "element.json");
  if (!meta) throw UsageError("cannot open archive metadata in " + dir);
  nlohmann::json doc;
  meta >> doc;

  ElementArchive ar;
  ar.spec = spec_from_json(doc.at("spec"));
  for (const auto& v : doc.at("polygon").at("vertices")) {
    ar.polygon_vertices.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  ar.condition = doc.at("condition").get<double>();
  ar.kronecker_defect = doc.at("kronecker_defect").get<double>();
  ar.n_normal = doc.at("n_normal").get<int>();
  ar.n_internal = doc.at("n_internal").get<int>();
  for (const auto& c : doc.at("classification")) {
    ar.classification.push_back(c.get<std::string>());
  }
  ar.count_normal = doc.at("counts").at("normal").get<int>();
  ar.count_degenerate = doc.at("counts").at("degenerate_normal").get<int>();
  ar.count_internal = doc.at("counts").at("internal").get<int>();
  ar.extra_constant_generators = doc.at("extra_constant_generators").get<int>();
  ar.gram_rank = doc.at("gram_rank").get<int>();
  if (doc.contains("reduced_dimension")) {
    ar.series_reduced_dimension =
        doc.at("reduced_dimension").at("series_formula").get<int>();
  }

  const auto tshape = doc.at("matrices").at("transfer_shape");
  const auto cshape = doc.at("matrices").at("coeff_shape");
  std::ifstream bin(fs::path(dir) / "matrices.bin", std::ios::binary);
  if (!bin) throw UsageError("cannot open matrix payload in " + dir);
  ar.transfer = read_matrix(bin, tshape[0].get<int>(), tshape[1].get<int>());
  ar.coeff = read_matrix(bin, cshape[0].get<int>(), cshape[1].get<int>());
  return ar;
}

double ElementArchive::recompute_kronecker_defect() const {
  return (transfer * coeff - Eigen::MatrixXd::Identity(transfer.rows(), transfer.cols()))
      .cwiseAbs()
      .maxCoeff();
}

const Polygon& ElementArchive::polygon() const {
  if (!poly_cache_) poly_cache_ = std::make_shared<Polygon>(polygon_vertices);
  return *poly_cache_;
}

Vec2 ElementArchive::trace(int i, int edge, double t) const {
  const Polygon& poly = polygon();
  if (!layout_cache_) {
    layout_cache_ =
        std::make_shared<GeneratorLayout>(enumerate_generators(poly, spec));
  }
  const GeneratorLayout& lay = *layout_cache_;
  const Edge& e = poly.edge(edge);
  Vec2 acc{0.0, 0.0};
  for (int b = 0; b < lay.per_edge; ++b) {
    const int g = lay.edge_offset[edge] + b;
    const double c = coeff(g, i);
    if (c != 0.0) acc = acc + lay.generators[g].trace(e, edge, t) * c;
  }
  return acc;
}

double ElementArchive::normal_trace(int i, int edge, double t) const {
  return trace(i, edge, t).dot(polygon().edge(edge).normal);
}

}  // namespace polyhdiv
