#include "microlearn/pseudonym.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unordered_set>
#include <unistd.h>

using namespace microlearn;

TEST_SUITE("pseudonym") {

TEST_CASE("stable 32-character lowercase hex tokens") {
  const Pseudonymizer p("a deployment secret of decent length");
  const auto t = p.pseudonym("ada@example.org");
  CHECK(t.size() == Pseudonymizer::kTokenLength);
  CHECK(is_pseudonym(t));
  CHECK(t == p.pseudonym("ada@example.org"));
  CHECK(t != p.pseudonym("Ada@example.org"));
  CHECK(t.find("ada") == std::string::npos);
}

TEST_CASE("HMAC-SHA256 known answer, truncated") {
  // RFC 4231 test case 1.
  const Pseudonymizer p(std::string(20, '\x0b'));
  CHECK(p.pseudonym("Hi There") == "b0344c61d8db38535ca8afceaf0bf12b");
}

TEST_CASE("different keys give different tokens") {
  const Pseudonymizer a("0123456789abcdef-one");
  const Pseudonymizer b("0123456789abcdef-two");
  CHECK(a.pseudonym("x") != b.pseudonym("x"));
}

TEST_CASE("short keys are refused") {
  CHECK_THROWS_AS(Pseudonymizer("short"), std::invalid_argument);
  CHECK_NOTHROW(Pseudonymizer(std::string(Pseudonymizer::kMinKeyBytes, 'k')));
}

TEST_CASE("key file whitespace is ignored") {
  const auto path = std::filesystem::temp_directory_path() / ("microlearn-key-" + std::to_string(::getpid()));
  { std::ofstream(path) << "  0123456789abcdef0123  \n"; }
  CHECK(Pseudonymizer::from_key_file(path).pseudonym("x") == Pseudonymizer("0123456789abcdef0123").pseudonym("x"));
  std::filesystem::remove(path);
}

TEST_CASE("no collisions across 100000 identities") {
  const Pseudonymizer p("collision-check-key-0001");
  std::unordered_set<std::string> seen;
  for (int i = 0; i < 100000; ++i) seen.insert(p.pseudonym("learner" + std::to_string(i) + "@example.org"));
  CHECK(seen.size() == 100000);
}

TEST_CASE("token shape check") {
  CHECK(is_pseudonym(std::string(32, 'a')));
  CHECK_FALSE(is_pseudonym(std::string(31, 'a')));
  CHECK_FALSE(is_pseudonym(std::string(32, 'A')));
  CHECK_FALSE(is_pseudonym("ada@example.org"));
}

}
