package shop;

import static org.junit.Assert.assertEquals;

import org.junit.Test;

public class CartTest {

    @Test
    public void eagerAddRemove() {
        Cart cart = new Cart();
        cart.addItem(5);
        cart.removeItem(5);
        cart.addItem(3);
        assertEquals(3, cart.getTotal());
    }

    @Test
    public void singleMethodRepeated() {
        Cart cart = new Cart();
        cart.addItem(1);
        cart.addItem(2);
        cart.addItem(3);
    }

    @Test
    public void eagerWithCount() {
        Cart cart = new Cart();
        cart.addItem(4);
        assertEquals(1, cart.itemCount());
    }

    @Test
    public void nestedCalls() {
        Cart cart = new Cart();
        cart.addItem(Integer.parseInt("7"));
        assertEquals(7, cart.getTotal());
    }

    @Test
    public void emptyBody() {
    }

    @Test
    public void libraryOnly() {
        String s = String.valueOf(3);
        assertEquals("3", s.trim());
    }
}
