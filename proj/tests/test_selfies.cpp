#include <doctest.h>

#include <set>

#include "alchemloop/molgraph/smiles.hpp"
#include "alchemloop/selfies/selfies.hpp"
#include "test_helpers.hpp"

using namespace alchemloop;
using namespace alchemloop::selfies;
using molgraph::Molecule;

TEST_CASE("token text round trip") {
  const SelfiesString s = parse("[C][=O][Branch1][N][Ring2]");
  CHECK(to_string(s) == "[C][=O][Branch1][N][Ring2]");
  CHECK_THROWS_AS(parse("[C][X]"), UnknownToken);
  CHECK_THROWS_AS(parse("[C"), UnknownToken);
}

TEST_CASE("decode: ethane") {
  // Expected graph frozen from the published SELFIES derivation rules:
  // [C][C] places two carbons joined by a single bond.
  const Molecule m = decode(parse("[C][C]"));
  REQUIRE(m.atom_count() == 2);
  REQUIRE(m.bond_count() == 1);
  CHECK(m.bonds()[0].order == 1);
  CHECK(m.atom(0).implicit_h == 3);
  CHECK(m.atom(1).implicit_h == 3);
}

TEST_CASE("decode: formaldehyde-like C=O") {
  // [C][=O]: the double bond fits both valences, so it is kept as order 2.
  const Molecule m = decode(parse("[C][=O]"));
  REQUIRE(m.atom_count() == 2);
  REQUIRE(m.bond_count() == 1);
  CHECK(m.bonds()[0].order == 2);
  CHECK(m.atom(0).element == molgraph::Element::C);
  CHECK(m.atom(0).implicit_h == 2);
  CHECK(m.atom(1).element == molgraph::Element::O);
  CHECK(m.atom(1).implicit_h == 0);
}

TEST_CASE("decode: bond orders are capped by remaining valence") {
  // O has valence 2, so the triple-bond token after [O] caps at order 2.
  const Molecule m = decode(parse("[O][#C]"));
  REQUIRE(m.bond_count() == 1);
  CHECK(m.bonds()[0].order == 2);
  // and a chain atom with no remaining valence skips later symbols:
  // [O][=C][=O] builds O=C=O leaving the last O saturated, so the
  // trailing [C] cannot act
  const Molecule s = decode(parse("[O][=C][=O][C]"));
  CHECK(s.atom_count() == 3);
  CHECK(s.bond_count() == 2);
}

TEST_CASE("decode: empty and inactive derivations fall back to methane") {
  const Molecule m = decode(SelfiesString{});
  REQUIRE(m.atom_count() == 1);
  CHECK(m.atom(0).implicit_h == 4);
  // ring/branch tokens alone cannot place atoms
  const Molecule r = decode(parse("[Ring1][Ring1][Branch1]"));
  CHECK(r.atom_count() == 1);
}

TEST_CASE("decode: totality on 10,000 random token strings") {
  Rng rng(31337);
  for (int trial = 0; trial < 10000; ++trial) {
    const SelfiesString s = testutil::random_selfies(rng, 40);
    // The Molecule constructor enforces every valence/structure invariant,
    // so successful construction is the assertion.
    CHECK_NOTHROW(decode(s));
  }
}

TEST_CASE("encode: ethane round trip") {
  const Molecule ethane = decode(parse("[C][C]"));
  CHECK(testutil::is_isomorphic(decode(encode(ethane)), ethane));
}

TEST_CASE("encode: round trip on 2,000 random decoded molecules") {
  Rng rng(777);
  for (int trial = 0; trial < 2000; ++trial) {
    const Molecule m = testutil::random_molecule(rng, 40);
    const Molecule back = decode(encode(m));
    REQUIRE(testutil::is_isomorphic(back, m));
  }
}

TEST_CASE("encode: nitro group and charged atoms") {
  const Molecule m = molgraph::parse_smiles("C[N+](=O)[O-]");
  CHECK(testutil::is_isomorphic(decode(encode(m)), m));
}

TEST_CASE("encode: oversized ring is inexpressible") {
  // For a cycle of n carbons rooted at position r, the encoder needs a
  // branch of r tokens and a ring span of n-1-r; both operands cap at
  // 4096, so n = 8300 is out of range for every root.
  constexpr std::uint16_t n = 8300;
  std::vector<molgraph::Atom> atoms(n, {molgraph::Element::C, 0, 2});
  std::vector<molgraph::Bond> bonds;
  for (std::uint16_t i = 0; i + 1 < n; ++i) {
    bonds.push_back({i, static_cast<std::uint16_t>(i + 1), 1});
  }
  bonds.push_back({static_cast<std::uint16_t>(n - 1), 0, 1});
  const Molecule big(std::move(atoms), std::move(bonds));
  CHECK_THROWS_AS(encode(big), Inexpressible);

  // a smaller cycle with the same shape still encodes
  std::vector<molgraph::Atom> atoms2(4200, {molgraph::Element::C, 0, 2});
  std::vector<molgraph::Bond> bonds2;
  for (std::uint16_t i = 0; i + 1 < 4200; ++i) {
    bonds2.push_back({i, static_cast<std::uint16_t>(i + 1), 1});
  }
  bonds2.push_back({4199, 0, 1});
  CHECK_NOTHROW(encode(Molecule(std::move(atoms2), std::move(bonds2))));

  // non-single bonds forming a cycle have no spanning tree either
  std::vector<molgraph::Atom> cumulene(3, {molgraph::Element::C, 0, 0});
  std::vector<molgraph::Bond> cbonds{{0, 1, 2}, {1, 2, 2}, {2, 0, 2}};
  CHECK_THROWS_AS(encode(Molecule(std::move(cumulene), std::move(cbonds))), Inexpressible);
}

TEST_CASE("mutate: single edit semantics") {
  Rng rng(5);
  const SelfiesString s = parse("[C][N][O]");

  SUBCASE("length changes by at most one and output differs") {
    for (int i = 0; i < 500; ++i) {
      Rng r(derive_seed(5, std::to_string(i)));
      const SelfiesString out = mutate(s, r);
      const long diff = static_cast<long>(out.size()) - static_cast<long>(s.size());
      CHECK(diff >= -1);
      CHECK(diff <= 1);
      CHECK(out != s);
    }
  }

  SUBCASE("length-1 string never becomes empty") {
    const SelfiesString one = parse("[C]");
    for (int i = 0; i < 200; ++i) {
      Rng r(derive_seed(99, std::to_string(i)));
      const SelfiesString out = mutate(one, r);
      CHECK(!out.empty());
    }
  }

  SUBCASE("insert grows length by one") {
    // kind==1 is insert; scan for a seed whose first edit kind is insert
    for (int i = 0; i < 50; ++i) {
      Rng probe(derive_seed(123, std::to_string(i)));
      if (probe.below(3) == 1) {
        Rng r(derive_seed(123, std::to_string(i)));
        CHECK(mutate(s, r).size() == s.size() + 1);
      }
    }
  }

  SUBCASE("fixed seed reproduces a byte-identical mutation sequence") {
    Rng r1(42), r2(42);
    for (int i = 0; i < 1000; ++i) {
      CHECK(mutate(s, r1) == mutate(s, r2));
    }
  }

  SUBCASE("mutation closure: outputs always decode") {
    Rng r(2222);
    SelfiesString cur = s;
    for (int i = 0; i < 1000; ++i) {
      cur = mutate(cur, r);
      CHECK_NOTHROW(decode(cur));
    }
  }
}

TEST_CASE("crossover: identical parents return the parent") {
  Rng rng(1);
  const SelfiesString a = parse("[C][=O][N]");
  const CrossoverTrace t = crossover_trace(a, a, rng);
  CHECK(t.child == a);
  CHECK(t.path.size() == 1);
}

TEST_CASE("crossover: returned child attains the path maximum") {
  // Exhaustive re-enumeration of the trace path is the oracle.
  Rng rng(2468);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const SelfiesString a = testutil::random_selfies(rng, 12);
    const SelfiesString b = testutil::random_selfies(rng, 12);
    Rng cross_rng(derive_seed(1000, std::to_string(trial)));
    const CrossoverTrace t = crossover_trace(a, b, cross_rng);
    const auto fa = molgraph::fingerprint(alchemloop::selfies::decode(t.path.front()));
    const auto fb = molgraph::fingerprint(alchemloop::selfies::decode(t.path.back()));
    double best = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < t.path.size(); ++i) {
      const auto fc = molgraph::fingerprint(alchemloop::selfies::decode(t.path[i]));
      const double sim = joint_similarity(fc, fa, fb, JointSimilarity::Min);
      if (sim > best) {
        best = sim;
        best_idx = i;
      }
    }
    REQUIRE(t.best_similarity == best);
    REQUIRE(t.best_index == best_idx);  // earliest tie wins
    REQUIRE(t.child == t.path[best_idx]);
    ++checked;
  }
  CHECK(checked == 500);
}

TEST_CASE("crossover: [C][C][C] x [C][=O] equals brute-force path maximum") {
  Rng rng(9);
  const CrossoverTrace t = crossover_trace(parse("[C][C][C]"), parse("[C][=O]"), rng);
  const auto fa = molgraph::fingerprint(decode(t.path.front()));
  const auto fb = molgraph::fingerprint(decode(t.path.back()));
  double best = -1.0;
  for (const SelfiesString& step : t.path) {
    best = std::max(best, joint_similarity(molgraph::fingerprint(decode(step)), fa, fb,
                                           JointSimilarity::Min));
  }
  CHECK(t.best_similarity == best);
  // the child is at least as jointly-similar as either parent endpoint
  CHECK(t.best_similarity >=
        joint_similarity(fa, fa, fb, JointSimilarity::Min));
  CHECK(t.best_similarity >=
        joint_similarity(fb, fa, fb, JointSimilarity::Min));
}

TEST_CASE("crossover: path endpoints are the parents") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const SelfiesString a = testutil::random_selfies(rng, 10);
    const SelfiesString b = testutil::random_selfies(rng, 10);
    Rng r(trial);
    const CrossoverTrace t = crossover_trace(a, b, r);
    CHECK(t.path.front() == a);
    CHECK(t.path.back() == b);
  }
}
