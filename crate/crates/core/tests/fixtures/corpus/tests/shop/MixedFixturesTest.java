package shop;

import static org.junit.Assert.assertEquals;

import java.io.File;
import java.nio.file.Files;
import java.nio.file.Paths;
import java.sql.Connection;
import java.sql.DriverManager;
import java.util.List;

import org.junit.Test;

public class MixedFixturesTest {

    @Test
    public void guardedFileUnguardedConnection() throws Exception {
        File f = new File("seed.sql");
        Connection c = DriverManager.getConnection("jdbc:h2:mem:c");
        if (f.exists()) {
            c.createStatement().execute("runscript from 'seed.sql'");
        }
    }

    @Test
    public void cartFromFile() throws Exception {
        Cart cart = new Cart();
        List<String> lines = Files.readAllLines(Paths.get("prices.txt"));
        cart.addItem(lines.size());
        assertEquals(1, cart.itemCount());
    }
}
