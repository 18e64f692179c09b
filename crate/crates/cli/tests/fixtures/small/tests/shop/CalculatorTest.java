package shop;

import junit.framework.TestCase;

public class CalculatorTest extends TestCase {

    public void testMixed() {
        Calculator calc = new Calculator();
        int sum = calc.add(1, 2);
        int diff = calc.subtract(5, 3);
        int prod = calc.multiply(2, 2);
        assertEquals(3, sum);
        assertTrue(diff > 0 && prod > 0);
    }

    public void testSmoke() {
        Calculator calc = new Calculator();
        assertEquals(4, calc.add(2, 2));
    }

    // Takes a parameter, so JUnit 3 does not run it.
    public void testWithArgument(int x) {
        assertEquals(x, x);
    }

    private int helper() {
        return new Calculator().add(1, 1);
    }
}
